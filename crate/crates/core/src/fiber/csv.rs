//! Fiber list interchange: `id,x0,y0,z0,x1,y1,z1,radius_um`, micrometers, 6 decimals.

use std::fmt::Write as _;
use std::path::Path;

use super::Fiber;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "id,x0,y0,z0,x1,y1,z1,radius_um";

pub fn fibers_csv_string(fibers: &[Fiber]) -> String {
    let mut s = String::with_capacity(64 * (fibers.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for f in fibers {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            f.id, f.p0[0], f.p0[1], f.p0[2], f.p1[0], f.p1[1], f.p1[2], f.radius
        );
    }
    s
}

pub fn write_fibers_csv(fibers: &[Fiber], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, fibers_csv_string(fibers)).map_err(|e| Error::io(path, e))
}

pub fn read_fibers_csv(path: impl AsRef<Path>) -> Result<Vec<Fiber>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fibers_csv(&text).map_err(|msg| Error::format(path, msg))
}

pub fn parse_fibers_csv(text: &str) -> std::result::Result<Vec<Fiber>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => return Err(format!("bad header {h:?}, expected {CSV_HEADER:?}")),
        None => return Err("empty file".into()),
    }
    let mut fibers = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(format!("line {}: expected 8 fields, found {}", lineno + 1, fields.len()));
        }
        let id: u32 = fields[0]
            .parse()
            .map_err(|e| format!("line {}: id: {e}", lineno + 1))?;
        let mut nums = [0.0f64; 7];
        for (k, v) in fields[1..].iter().enumerate() {
            nums[k] = v
                .parse()
                .map_err(|e| format!("line {}: field {}: {e}", lineno + 1, k + 2))?;
        }
        let fiber = Fiber::new(id, [nums[0], nums[1], nums[2]], [nums[3], nums[4], nums[5]], nums[6])
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        fibers.push(fiber);
    }
    Ok(fibers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_six_decimals() {
        let f = Fiber::new(3, [1.0, 2.5, 3.25], [4.0, 5.0, 6.123_456_789], 6.5).unwrap();
        let s = fibers_csv_string(&[f]);
        assert_eq!(
            s,
            "id,x0,y0,z0,x1,y1,z1,radius_um\n3,1.000000,2.500000,3.250000,4.000000,5.000000,6.123457,6.500000\n"
        );
        let back = parse_fibers_csv(&s).unwrap();
        assert_eq!(back[0].id, 3);
        assert!((back[0].p1[2] - 6.123457).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_fibers_csv("x,y\n").is_err());
        assert!(parse_fibers_csv(&format!("{CSV_HEADER}\n1,2,3\n")).is_err());
        assert!(parse_fibers_csv(&format!("{CSV_HEADER}\n1,0,0,0,0,0,0,6.5\n")).is_err());
        assert!(parse_fibers_csv(&format!("{CSV_HEADER}\n")).unwrap().is_empty());
    }
}
