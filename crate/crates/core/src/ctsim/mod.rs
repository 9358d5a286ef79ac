//! From a fiber model to ground-truth labels and gray-value volumes.
//!
//! The fast path rasterizes an anti-aliased attenuation volume and degrades it with a
//! Gaussian PSF plus Gaussian noise at a given background SNR. The physics path runs a
//! parallel-beam forward projection and Ram-Lak filtered back projection per z-slice.

mod degrade;
mod fbp;
mod rasterize;

pub use degrade::{degrade, DegradeParams};
pub use fbp::{backproject_filtered, forward_project, ramp_filter, reconstruct_slice, simulate_fbp, Sinogram};
pub use rasterize::{rasterize_attenuation, rasterize_labels, Levels, Rasterized};
