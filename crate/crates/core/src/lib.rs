//! Reference pipeline for fiber segmentation in short-fiber-reinforced polymer CT volumes.
//!
//! - [`volume`]: dense 3D grids and the raw + JSON file format.
//! - [`fiber`]: random non-overlapping cylinder packing, model statistics, STL export.
//! - [`ctsim`]: ground-truth rasterization and a simplified CT degradation chain,
//!   including parallel-beam filtered back projection.
//! - [`annotation`]: polyline annotations to voxel ground truth (3D Bresenham, seeded
//!   region growing).
//! - [`vesselness`]: multi-scale Hessian / Frangi vesselness, binarization, connected
//!   components, structure-tensor orientation.
//! - [`metrics`]: Dice coefficient and Adjusted Rand Index.

pub mod annotation;
pub mod ctsim;
pub mod error;
pub mod fiber;
pub mod filter;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod vesselness;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{AnyVolume, GridSpec, LabelVolume, MaskVolume, Volume};
