use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{Fiber, FiberModel, GLASS_DENSITY, MATRIX_DENSITY};
use crate::volume::{GridSpec, LabelVolume, Volume};

/// Attenuation assigned to pure fiber and pure matrix voxels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Levels {
    pub fiber_value: f32,
    pub matrix_value: f32,
}

impl Default for Levels {
    /// The glass and polymer densities reused as attenuation proxies.
    fn default() -> Self {
        Levels {
            fiber_value: GLASS_DENSITY as f32,
            matrix_value: MATRIX_DENSITY as f32,
        }
    }
}

impl Levels {
    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_value.is_finite() && self.matrix_value.is_finite())
            || self.fiber_value <= self.matrix_value
        {
            return Err(Error::InvalidParam(format!(
                "fiber value {} must exceed matrix value {}",
                self.fiber_value, self.matrix_value
            )));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f32 {
        0.5 * (self.fiber_value + self.matrix_value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rasterized {
    pub labels: LabelVolume,
    /// Voxels claimed by more than one fiber; always 0 for a valid model.
    pub conflicts: u64,
}

fn check_covers(m: &FiberModel, grid: &GridSpec) -> Result<()> {
    let extent = grid.extent();
    // Tolerate rounding in dims * voxel_size (e.g. 128 * 3.9).
    let need = m.params.box_edge * (1.0 - 1e-12);
    if extent.iter().any(|&e| e < need) {
        return Err(Error::GridTooSmall {
            grid_extent: extent,
            box_edge: m.params.box_edge,
        });
    }
    Ok(())
}

/// Inclusive voxel index range whose centers can fall inside the fiber's capsule.
fn voxel_range(f: &Fiber, grid: &GridSpec, axis: usize) -> Option<(usize, usize)> {
    let h = grid.voxel_size();
    let n = grid.dims()[axis];
    let lo = f.p0[axis].min(f.p1[axis]) - f.radius;
    let hi = f.p0[axis].max(f.p1[axis]) + f.radius;
    // center (i + 0.5) h in [lo - h, hi + h] keeps every sub-sample in range
    let i0 = ((lo / h) - 1.5).floor().max(0.0);
    let i1 = ((hi / h) + 0.5).ceil();
    if i1 < 0.0 || i0 >= n as f64 {
        return None;
    }
    Some((i0 as usize, (i1 as usize).min(n - 1)))
}

fn for_each_voxel_near(f: &Fiber, grid: &GridSpec, mut visit: impl FnMut(usize, usize, usize)) {
    let (Some((x0, x1)), Some((y0, y1)), Some((z0, z1))) = (
        voxel_range(f, grid, 0),
        voxel_range(f, grid, 1),
        voxel_range(f, grid, 2),
    ) else {
        return;
    };
    for z in z0..=z1 {
        for y in y0..=y1 {
            for x in x0..=x1 {
                visit(x, y, z);
            }
        }
    }
}

/// Per-fiber ids: a voxel takes the id of the first (lowest-id) fiber whose capsule
/// contains its center.
pub fn rasterize_labels(m: &FiberModel, grid: &GridSpec) -> Result<Rasterized> {
    check_covers(m, grid)?;
    let mut labels = LabelVolume::zeros(*grid);
    let mut conflicts = 0u64;
    let mut order: Vec<&Fiber> = m.fibers.iter().collect();
    order.sort_by_key(|f| f.id);
    for f in order {
        for_each_voxel_near(f, grid, |x, y, z| {
            if f.capsule_contains(grid.voxel_center(x, y, z)) {
                let i = grid.index(x, y, z);
                let cur = labels.data()[i];
                if cur == 0 {
                    labels.data_mut()[i] = f.id;
                } else if cur != f.id {
                    conflicts += 1;
                }
            }
        });
    }
    Ok(Rasterized { labels, conflicts })
}

/// Partial-volume attenuation: each voxel mixes the two levels by the fraction of its
/// `supersample³` lattice points that fall inside a fiber.
///
/// Occupancy is summed per fiber and capped at the lattice size, which equals the
/// union exactly when capsules do not overlap.
pub fn rasterize_attenuation(
    m: &FiberModel,
    grid: &GridSpec,
    supersample: usize,
    levels: Levels,
) -> Result<Volume> {
    if supersample < 1 {
        return Err(Error::InvalidParam("supersample must be >= 1".into()));
    }
    levels.validate()?;
    check_covers(m, grid)?;

    let ss = supersample;
    let full = (ss * ss * ss) as u32;
    let h = grid.voxel_size();
    let offsets: Vec<f64> = (0..ss).map(|i| (i as f64 + 0.5) / ss as f64 * h).collect();

    let per_fiber: Vec<Vec<(usize, u32)>> = m
        .fibers
        .par_iter()
        .map(|f| {
            let mut hits = Vec::new();
            for_each_voxel_near(f, grid, |x, y, z| {
                let base = [x as f64 * h, y as f64 * h, z as f64 * h];
                let mut count = 0u32;
                for oz in &offsets {
                    for oy in &offsets {
                        for ox in &offsets {
                            if f.capsule_contains([base[0] + ox, base[1] + oy, base[2] + oz]) {
                                count += 1;
                            }
                        }
                    }
                }
                if count > 0 {
                    hits.push((grid.index(x, y, z), count));
                }
            });
            hits
        })
        .collect();

    let mut occupancy = vec![0u32; grid.len()];
    for hits in per_fiber {
        for (i, c) in hits {
            occupancy[i] = (occupancy[i] + c).min(full);
        }
    }

    let contrast = levels.fiber_value as f64 - levels.matrix_value as f64;
    let data = occupancy
        .into_par_iter()
        .map(|c| match c {
            0 => levels.matrix_value,
            c if c == full => levels.fiber_value,
            c => (levels.matrix_value as f64 + contrast * c as f64 / full as f64) as f32,
        })
        .collect();
    Volume::from_vec(*grid, data)
}
