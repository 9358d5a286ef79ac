//! The single JSON pipeline configuration. Every field has a default; unknown keys are
//! rejected.

use std::path::Path;

use fiberseg_core::ctsim::{DegradeParams, Levels};
use fiberseg_core::fiber::ModelParams;
use fiberseg_core::vesselness::{Binarization, ScaleSet, VesselnessParams};
use fiberseg_core::{Error, GridSpec, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    /// Attenuation of pure fiber and pure matrix voxels.
    pub levels: Levels,
    pub rasterize: RasterizeConfig,
    pub degrade: DegradeConfig,
    pub fbp: FbpConfig,
    pub segment: SegmentConfig,
    pub annotation: AnnotationConfig,
    pub metrics: MetricsConfig,
    pub stl: StlConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub dims: [usize; 3],
    pub voxel_size_um: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dims: [128; 3], voxel_size_um: 3.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RasterizeConfig {
    /// Sub-samples per voxel edge for the partial-volume attenuation.
    pub supersample: usize,
}

impl Default for RasterizeConfig {
    fn default() -> Self {
        RasterizeConfig { supersample: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradeConfig {
    pub psf_sigma_um: f64,
    /// `null` disables noise.
    pub snr: Option<f64>,
    pub noise_seed: u64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        DegradeConfig { psf_sigma_um: 4.0, snr: Some(20.0), noise_seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbpConfig {
    pub n_angles: usize,
    /// Run filtered back projection between degradation and segmentation in `pipeline`.
    pub enabled: bool,
}

impl Default for FbpConfig {
    fn default() -> Self {
        FbpConfig { n_angles: 180, enabled: false }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentConfig {
    pub scales: ScaleSet,
    pub vesselness: VesselnessParams,
    pub binarization: Binarization,
    pub orientation: OrientationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrientationConfig {
    pub sigma_g: f64,
    pub rho: f64,
}

impl Default for OrientationConfig {
    fn default() -> Self {
        OrientationConfig { sigma_g: 1.0, rho: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnotationConfig {
    /// Region-growing threshold; `null` uses the midpoint of the two levels.
    pub threshold: Option<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    /// Restrict the Adjusted Rand Index to ground-truth foreground voxels.
    pub ignore_background: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { ignore_background: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StlConfig {
    pub segments_per_circle: usize,
}

impl Default for StlConfig {
    fn default() -> Self {
        StlConfig { segments_per_circle: 16 }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
        serde_json::from_str(&text).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(seed) = seed {
            self.model.seed = seed;
            self.degrade.noise_seed = seed;
        }
        self
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.dims, self.grid.voxel_size_um)
    }

    pub fn degrade_params(&self) -> DegradeParams {
        DegradeParams {
            psf_sigma: self.degrade.psf_sigma_um,
            snr: self.degrade.snr.unwrap_or(f64::INFINITY),
            noise_seed: self.degrade.noise_seed,
            levels: self.levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        self.model.validate()?;
        self.grid()?;
        self.levels.validate()?;
        self.degrade_params().validate()?;
        self.segment.vesselness.validate()?;
        if self.rasterize.supersample < 1 {
            return bad("rasterize.supersample must be >= 1".into());
        }
        if self.fbp.n_angles < 1 {
            return bad("fbp.n_angles must be >= 1".into());
        }
        if self.stl.segments_per_circle < 3 {
            return bad("stl.segments_per_circle must be >= 3".into());
        }
        let o = self.segment.orientation;
        if !(o.sigma_g > 0.0 && o.rho >= 0.0) {
            return bad(format!("orientation needs sigma_g > 0 and rho >= 0, got {} and {}", o.sigma_g, o.rho));
        }
        if let Some(t) = self.annotation.threshold {
            if !t.is_finite() {
                return bad(format!("annotation.threshold must be finite, got {t}"));
            }
        }
        Ok(())
    }
}
