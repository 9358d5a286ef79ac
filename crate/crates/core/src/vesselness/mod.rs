//! Reference fiber segmentation: scale-space Hessian, Frangi vesselness with a
//! multi-scale maximum, binarization and connected components, plus a 3D structure
//! tensor for local fiber orientation.

mod binarize;
mod frangi;
mod hessian;
mod orientation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use binarize::{binarize, connected_components, otsu_threshold, Binarization, Components};
pub use frangi::{frangi_multiscale, frangi_response, vesselness_value};
pub use hessian::{hessian_at_scale, hessian_components, EigenField};
pub use orientation::{structure_tensor_orientation, OrientationField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VesselnessParams {
    /// Plate-vs-line sensitivity (R_A term).
    pub alpha: f64,
    /// Blob sensitivity (R_B term).
    pub beta: f64,
    /// Structureness sensitivity (S term); ignored when `c_auto` is set.
    pub c: f64,
    /// Use half the maximum Frobenius norm of the Hessian at each scale as `c`.
    pub c_auto: bool,
    /// Look for dark fibers on a bright background by inverting the input.
    pub dark_fibers: bool,
}

impl Default for VesselnessParams {
    fn default() -> Self {
        VesselnessParams {
            alpha: 0.5,
            beta: 0.5,
            c: 1.0,
            c_auto: true,
            dark_fibers: false,
        }
    }
}

impl VesselnessParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.alpha) || !positive(self.beta) {
            return Err(Error::InvalidParam(format!(
                "alpha and beta must be positive, got {} and {}",
                self.alpha, self.beta
            )));
        }
        if !self.c_auto && !positive(self.c) {
            return Err(Error::InvalidParam(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }
}

/// Strictly ascending positive Gaussian scales, in voxels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScaleSet(Vec<f64>);

impl ScaleSet {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::InvalidParam("scale set is empty".into()));
        }
        if sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParam(format!("scales must be positive: {sigmas:?}")));
        }
        if sigmas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParam(format!(
                "scales must be strictly ascending: {sigmas:?}"
            )));
        }
        Ok(ScaleSet(sigmas))
    }

    /// Scales matched to a fiber radius: 0.6, 0.9 and 1.2 times `radius / voxel_size`,
    /// rounded to a tenth of a voxel. 6.5 μm fibers on a 3.9 μm grid give
    /// {1.0, 1.5, 2.0}.
    pub fn for_radius(radius: f64, voxel_size: f64) -> Result<Self> {
        let r = radius / voxel_size;
        Self::new(
            [0.6, 0.9, 1.2]
                .iter()
                .map(|k| (k * r * 10.0).round() / 10.0)
                .collect(),
        )
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.0
    }
}

impl Default for ScaleSet {
    fn default() -> Self {
        ScaleSet(vec![1.0, 1.5, 2.0])
    }
}

impl TryFrom<Vec<f64>> for ScaleSet {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ScaleSet::new(v)
    }
}

impl From<ScaleSet> for Vec<f64> {
    fn from(s: ScaleSet) -> Self {
        s.0
    }
}
