//! Polyline fiber annotations to voxel ground truth.
//!
//! Each annotated chain is drawn into a label volume with 3D Bresenham lines; the
//! drawn voxels then seed a thresholded region growing on the gray volume.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{GridSpec, LabelVolume, Volume};

pub type Voxel = [i64; 3];

/// One annotated fiber: an id and an ordered chain of voxel coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolylineAnnotation {
    pub id: u32,
    pub points: Vec<Voxel>,
}

impl PolylineAnnotation {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidAnnotation {
            id: self.id,
            reason: reason.to_string(),
        };
        if self.id == 0 {
            return Err(invalid("id 0 is reserved for background"));
        }
        if self.points.len() < 2 {
            return Err(invalid("a chain needs at least 2 points"));
        }
        for (i, &p) in self.points.iter().enumerate() {
            if !grid.contains(p) {
                return Err(Error::AnnotationOutOfBounds {
                    id: self.id,
                    point_index: i,
                    point: p,
                    dims: grid.dims(),
                });
            }
        }
        if self.points.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("consecutive points must differ"));
        }
        Ok(())
    }
}

/// Reads the JSON list `[{"id": k, "points": [[x, y, z], ...]}, ...]`.
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<PolylineAnnotation>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_annotations(annotations: &[PolylineAnnotation], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(annotations).expect("annotations serialize");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Voxels of the digital line from `p0` to `p1`, both included.
///
/// Integer-only: the axis with the largest extent advances every step, the other two
/// carry error accumulators and step when those turn positive.
pub fn bresenham3d(p0: Voxel, p1: Voxel) -> Vec<Voxel> {
    let d = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
    let a = d.map(i64::abs);
    let s = d.map(i64::signum);
    let major = if a[0] >= a[1] && a[0] >= a[2] {
        0
    } else if a[1] >= a[2] {
        1
    } else {
        2
    };
    let (m1, m2) = ((major + 1) % 3, (major + 2) % 3);
    let steps = a[major];

    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut p = p0;
    let mut e1 = 2 * a[m1] - a[major];
    let mut e2 = 2 * a[m2] - a[major];
    out.push(p);
    for _ in 0..steps {
        if e1 > 0 {
            p[m1] += s[m1];
            e1 -= 2 * a[major];
        }
        if e2 > 0 {
            p[m2] += s[m2];
            e2 -= 2 * a[major];
        }
        e1 += 2 * a[m1];
        e2 += 2 * a[m2];
        p[major] += s[major];
        out.push(p);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedSeeds {
    pub seeds: LabelVolume,
    /// Voxels reached by a chain after a different chain already claimed them.
    pub conflicts: u64,
}

/// Draws every chain with [`bresenham3d`]; the first id to reach a voxel keeps it.
pub fn render_polylines(annotations: &[PolylineAnnotation], grid: &GridSpec) -> Result<RenderedSeeds> {
    for a in annotations {
        a.validate(grid)?;
    }
    let mut seeds = LabelVolume::zeros(*grid);
    let mut conflicts = 0u64;
    for a in annotations {
        for w in a.points.windows(2) {
            for v in bresenham3d(w[0], w[1]) {
                let i = grid.index(v[0] as usize, v[1] as usize, v[2] as usize);
                let cur = seeds.data()[i];
                if cur == 0 {
                    seeds.data_mut()[i] = a.id;
                } else if cur != a.id {
                    conflicts += 1;
                }
            }
        }
    }
    Ok(RenderedSeeds { seeds, conflicts })
}

/// Grows every seed label into 26-neighbors whose gray value is at least `threshold`.
///
/// Growth is breadth-first in synchronous rounds: each round, every label advances its
/// front by one ring, and a voxel reached by several labels in the same round goes to
/// the smallest id. Seed voxels keep their labels whatever their gray value.
pub fn region_grow(gray: &Volume, seeds: &LabelVolume, threshold: f32) -> Result<LabelVolume> {
    gray.ensure_same_shape(seeds)?;
    let grid = *gray.spec();
    let values = gray.data();
    let mut labels = seeds.clone();
    let mut front: Vec<usize> = (0..grid.len()).filter(|&i| labels.data()[i] != 0).collect();
    // Claims made during the current round; 0 = unclaimed.
    let mut claim = vec![0u32; grid.len()];

    while !front.is_empty() {
        let mut next = Vec::new();
        let out = labels.data();
        for &i in &front {
            let label = out[i];
            for n in grid.neighbors26(i) {
                if out[n] != 0 || values[n] < threshold {
                    continue;
                }
                if claim[n] == 0 {
                    claim[n] = label;
                    next.push(n);
                } else if label < claim[n] {
                    claim[n] = label;
                }
            }
        }
        let out = labels.data_mut();
        for &n in &next {
            out[n] = claim[n];
            claim[n] = 0;
        }
        front = next;
    }
    Ok(labels)
}
