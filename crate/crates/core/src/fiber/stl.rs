//! Binary STL export: each fiber becomes a closed `s`-gonal prism with fan caps.

use std::f64::consts::PI;
use std::path::Path;

use super::FiberModel;
use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};

const HEADER: &[u8] = b"fiberseg fiber model";

/// Tessellates every fiber as `2s` side triangles plus `2s` cap triangles.
pub fn export_stl(m: &FiberModel, segments_per_circle: usize) -> Result<Vec<u8>> {
    if segments_per_circle < 3 {
        return Err(Error::InvalidParam(format!(
            "segments per circle must be >= 3, got {segments_per_circle}"
        )));
    }
    let s = segments_per_circle;
    let count = m.fibers.len() * 4 * s;
    let count = u32::try_from(count)
        .map_err(|_| Error::InvalidParam(format!("{count} triangles exceed the STL limit")))?;

    let mut out = Vec::with_capacity(84 + 50 * count as usize);
    let mut header = [0u8; 80];
    header[..HEADER.len()].copy_from_slice(HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&count.to_le_bytes());

    for f in &m.fibers {
        let axis = geometry::sub(f.p1, f.p0);
        let (u, v) = geometry::orthonormal_basis(axis);
        let ring = |base: Vec3, k: usize| -> [f32; 3] {
            let a = 2.0 * PI * k as f64 / s as f64;
            let off = geometry::add(
                geometry::scale(u, f.radius * a.cos()),
                geometry::scale(v, f.radius * a.sin()),
            );
            to_f32(geometry::add(base, off))
        };
        let bottom: Vec<[f32; 3]> = (0..s).map(|k| ring(f.p0, k)).collect();
        let top: Vec<[f32; 3]> = (0..s).map(|k| ring(f.p1, k)).collect();
        let c0 = to_f32(f.p0);
        let c1 = to_f32(f.p1);

        // (u, v, axis) is right-handed, so increasing k runs counter-clockwise seen
        // from the p1 end.
        for k in 0..s {
            let k1 = (k + 1) % s;
            push_triangle(&mut out, bottom[k], bottom[k1], top[k1]);
            push_triangle(&mut out, bottom[k], top[k1], top[k]);
            push_triangle(&mut out, c1, top[k], top[k1]);
            push_triangle(&mut out, c0, bottom[k1], bottom[k]);
        }
    }
    Ok(out)
}

pub fn write_stl(m: &FiberModel, segments_per_circle: usize, path: impl AsRef<Path>) -> Result<()> {
    let bytes = export_stl(m, segments_per_circle)?;
    std::fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}

fn to_f32(p: Vec3) -> [f32; 3] {
    [p[0] as f32, p[1] as f32, p[2] as f32]
}

fn push_triangle(out: &mut Vec<u8>, a: [f32; 3], b: [f32; 3], c: [f32; 3]) {
    let d = |p: [f32; 3], q: [f32; 3]| -> Vec3 {
        [(q[0] - p[0]) as f64, (q[1] - p[1]) as f64, (q[2] - p[2]) as f64]
    };
    let n = geometry::cross(d(a, b), d(a, c));
    let len = geometry::norm(n);
    let n = if len > 0.0 { geometry::scale(n, 1.0 / len) } else { n };
    for x in to_f32(n).iter().chain(&a).chain(&b).chain(&c) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&0u16.to_le_bytes());
}
