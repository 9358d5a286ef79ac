use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Levels;
use crate::error::{Error, Result};
use crate::filter;
use crate::volume::Volume;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradeParams {
    /// Gaussian PSF standard deviation in micrometers; 0 disables blurring.
    pub psf_sigma: f64,
    /// Background mean over noise standard deviation; `f64::INFINITY` disables noise.
    pub snr: f64,
    pub noise_seed: u64,
    pub levels: Levels,
}

impl Default for DegradeParams {
    fn default() -> Self {
        DegradeParams {
            psf_sigma: 4.0,
            snr: 20.0,
            noise_seed: 0,
            levels: Levels::default(),
        }
    }
}

impl DegradeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.psf_sigma.is_finite() && self.psf_sigma >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "psf sigma must be >= 0, got {}",
                self.psf_sigma
            )));
        }
        if !(self.snr > 0.0) {
            return Err(Error::InvalidParam(format!("snr must be > 0, got {}", self.snr)));
        }
        self.levels.validate()
    }
}

/// Blur with the PSF, then add i.i.d. Gaussian noise whose standard deviation is the
/// blurred background mean divided by the SNR.
///
/// The background is the set of input voxels below the midpoint between the two
/// levels; if there are none, the whole volume is used. Noise for slice `z` comes from
/// its own generator seeded by `(noise_seed, z)`, so the result does not depend on
/// scheduling.
pub fn degrade(v: &Volume, p: &DegradeParams) -> Result<Volume> {
    p.validate()?;
    let dims = v.dims();
    let sigma_vox = p.psf_sigma / v.spec().voxel_size();
    let input: Vec<f64> = v.data().iter().map(|&x| x as f64).collect();
    let blurred = filter::gaussian_smooth(&input, dims, sigma_vox);

    if p.snr.is_infinite() {
        return Volume::from_vec(*v.spec(), blurred.into_iter().map(|x| x as f32).collect());
    }

    let mid = p.levels.midpoint();
    let (sum, count) = v
        .data()
        .iter()
        .zip(&blurred)
        .filter(|(&raw, _)| raw < mid)
        .fold((0.0f64, 0usize), |(s, c), (_, &b)| (s + b, c + 1));
    let background = if count > 0 {
        sum / count as f64
    } else {
        blurred.iter().sum::<f64>() / blurred.len() as f64
    };
    let stddev = background.abs() / p.snr;

    let plane = dims[0] * dims[1];
    let mut out = vec![0f32; blurred.len()];
    out.par_chunks_mut(plane)
        .zip(blurred.par_chunks(plane))
        .enumerate()
        .for_each(|(z, (dst, src))| {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(slice_seed(p.noise_seed, z as u64));
            for (d, &s) in dst.iter_mut().zip(src) {
                let n: f64 = StandardNormal.sample(&mut rng);
                *d = (s + stddev * n) as f32;
            }
        });
    Volume::from_vec(*v.spec(), out)
}

/// splitmix64 finalizer over the pair.
fn slice_seed(seed: u64, slice: u64) -> u64 {
    let mut z = seed ^ slice.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
