//! Cylinder fibers, random non-overlapping packing, model statistics and STL export.

mod csv;
mod generate;
mod stats;
mod stl;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};

pub use csv::{parse_fibers_csv, read_fibers_csv, write_fibers_csv, fibers_csv_string};
pub use generate::generate_model;
pub use stats::{
    label_statistics, model_statistics, weight_fraction, Histogram, LabelStats, ModelStats,
    GLASS_DENSITY, MATRIX_DENSITY,
    PHI_BIN_DEG, THETA_BIN_DEG,
};
pub use stl::{export_stl, write_stl};

/// A straight flat-ended cylinder with axis `[p0, p1]`, coordinates in micrometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub id: u32,
    pub p0: Vec3,
    pub p1: Vec3,
    pub radius: f64,
}

impl Fiber {
    pub fn new(id: u32, p0: Vec3, p1: Vec3, radius: f64) -> Result<Self> {
        let f = Fiber { id, p0, p1, radius };
        if id == 0 {
            return Err(Error::InvalidParam("fiber id 0 is reserved for background".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParam(format!("fiber {id}: radius must be positive")));
        }
        if !(f.length() > 0.0 && f.length().is_finite()) {
            return Err(Error::InvalidParam(format!("fiber {id}: zero length")));
        }
        Ok(f)
    }

    pub fn length(&self) -> f64 {
        geometry::norm(geometry::sub(self.p1, self.p0))
    }

    /// Flat-ended cylinder volume, π r² L.
    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * self.length()
    }

    /// Unit axis direction, canonicalized (fibers are unoriented).
    pub fn axis(&self) -> Vec3 {
        geometry::canonical_axis(geometry::normalize(geometry::sub(self.p1, self.p0)))
    }

    /// Point-in-capsule test: distance from `p` to the axis segment is at most the radius.
    #[inline]
    pub fn capsule_contains(&self, p: Vec3) -> bool {
        geometry::point_segment_dist2(p, self.p0, self.p1) <= self.radius * self.radius
    }

    /// Whether the capsule (both end spheres included) lies inside `[0, box_edge]³`.
    pub fn inside_box(&self, box_edge: f64) -> bool {
        let r = self.radius;
        self.p0
            .iter()
            .chain(self.p1.iter())
            .all(|&c| c >= r && c <= box_edge - r)
    }
}

/// True iff the axis segments are closer than the sum of the radii.
pub fn capsules_overlap(a: &Fiber, b: &Fiber) -> bool {
    let reach = a.radius + b.radius;
    geometry::segment_segment_dist2(a.p0, a.p1, b.p0, b.p1) < reach * reach
}

/// Parameters of the random packing. Defaults are the reference model: a 2 mm cube,
/// 6.5 μm radius, lengths ~ N(500, 100) μm, 5.4 % target, 150 000 attempts.
///
/// One attempt is one sampled fiber (length and axis direction), which is then dropped
/// at up to `placement_tries` uniformly random centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub box_edge: f64,
    pub radius: f64,
    pub mean_length: f64,
    pub length_stddev: f64,
    pub target_fraction: f64,
    pub max_attempts: u64,
    /// Random positions tried for each sampled fiber before it is discarded.
    pub placement_tries: u32,
    pub seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            box_edge: 2000.0,
            radius: 6.5,
            mean_length: 500.0,
            length_stddev: 100.0,
            target_fraction: 0.054,
            max_attempts: 150_000,
            placement_tries: 1000,
            seed: 0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.box_edge.is_finite() && 2.0 * self.radius < self.box_edge) {
            return bad(format!(
                "box edge {} must exceed the fiber diameter {}",
                self.box_edge,
                2.0 * self.radius
            ));
        }
        if !(self.mean_length.is_finite() && self.mean_length > 0.0) {
            return bad(format!("mean length must be positive, got {}", self.mean_length));
        }
        if !(self.length_stddev.is_finite() && self.length_stddev >= 0.0) {
            return bad(format!("length stddev must be >= 0, got {}", self.length_stddev));
        }
        if !(self.target_fraction > 0.0 && self.target_fraction < 1.0) {
            return bad(format!(
                "target fraction must be in (0, 1), got {}",
                self.target_fraction
            ));
        }
        if self.placement_tries == 0 {
            return bad("placement tries must be >= 1".into());
        }
        if self.mean_length > self.max_fit_length() + 6.0 * self.length_stddev {
            return bad(format!(
                "mean length {} cannot fit in a box of edge {}",
                self.mean_length, self.box_edge
            ));
        }
        Ok(())
    }

    pub fn box_volume(&self) -> f64 {
        self.box_edge.powi(3)
    }

    /// Longest axis that fits in the box at some position: the main diagonal of the
    /// cube shrunk by the radius on every face.
    pub fn max_fit_length(&self) -> f64 {
        (self.box_edge - 2.0 * self.radius) * 3f64.sqrt()
    }
}

/// An accepted packing, fibers in acceptance order with ids 1..=n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberModel {
    pub params: ModelParams,
    pub fibers: Vec<Fiber>,
    pub attempts_used: u64,
}

impl FiberModel {
    pub fn volume_fraction(&self) -> f64 {
        self.fibers.iter().map(Fiber::volume).sum::<f64>() / self.params.box_volume()
    }

    /// O(n²) pairwise overlap audit; returns the offending id pairs.
    pub fn overlap_violations(&self) -> Vec<(u32, u32)> {
        use rayon::prelude::*;
        let fibers = &self.fibers;
        let mut out: Vec<(u32, u32)> = (0..fibers.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                fibers[i + 1..]
                    .iter()
                    .filter(move |b| capsules_overlap(&fibers[i], b))
                    .map(move |b| (fibers[i].id, b.id))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Ids of fibers whose capsule leaves the box.
    pub fn out_of_box(&self) -> Vec<u32> {
        self.fibers
            .iter()
            .filter(|f| !f.inside_box(self.params.box_edge))
            .map(|f| f.id)
            .collect()
    }
}
