use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::{convolve_axis, Kernel};
use crate::linalg::{sort_by_magnitude, sym3_eigenvalues, Sym3};
use crate::volume::{GridSpec, Volume};

/// Per-voxel Hessian eigenvalues ordered `|λ1| <= |λ2| <= |λ3|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenField {
    pub spec: GridSpec,
    pub sigma: f64,
    pub values: Vec<[f64; 3]>,
}

/// The six scale-normalized second derivatives `σ² ∂²(G_σ * v)`, returned as
/// `[xx, yy, zz, xy, xz, yz]`.
///
/// Each component is a separable product of sampled Gaussian kernels (order 0, 1 or 2
/// per axis) truncated at ±4σ with reflect boundaries.
pub fn hessian_components(v: &Volume, sigma: f64) -> Result<[Vec<f64>; 6]> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParam(format!("sigma must be positive, got {sigma}")));
    }
    let dims = v.dims();
    let input: Vec<f64> = v.data().iter().map(|&x| x as f64).collect();
    let k0 = Kernel::gaussian(sigma);
    let k1 = Kernel::gaussian_d1(sigma);
    let k2 = Kernel::gaussian_d2(sigma);
    let conv = |data: &[f64], axis: usize, k: &Kernel| convolve_axis(data, dims, axis, k);

    let z0 = conv(&input, 2, &k0);
    let z1 = conv(&input, 2, &k1);
    let z2 = conv(&input, 2, &k2);
    drop(input);

    let z0y0 = conv(&z0, 1, &k0);
    let z0y1 = conv(&z0, 1, &k1);
    let z0y2 = conv(&z0, 1, &k2);
    drop(z0);
    let z1y0 = conv(&z1, 1, &k0);
    let z1y1 = conv(&z1, 1, &k1);
    drop(z1);
    let z2y0 = conv(&z2, 1, &k0);
    drop(z2);

    let s2 = sigma * sigma;
    let finish = |data: &[f64], k: &Kernel| -> Vec<f64> {
        let mut out = conv(data, 0, k);
        out.par_iter_mut().for_each(|x| *x *= s2);
        out
    };
    Ok([
        finish(&z0y0, &k2),
        finish(&z0y2, &k0),
        finish(&z2y0, &k0),
        finish(&z0y1, &k1),
        finish(&z1y0, &k1),
        finish(&z1y1, &k0),
    ])
}

/// Eigenvalues of the scale-normalized Hessian at every voxel; ties in magnitude are
/// ordered by signed value.
pub fn hessian_at_scale(v: &Volume, sigma: f64) -> Result<EigenField> {
    let h = hessian_components(v, sigma)?;
    let values = (0..v.spec().len())
        .into_par_iter()
        .map(|i| {
            let m: Sym3 = [h[0][i], h[1][i], h[2][i], h[3][i], h[4][i], h[5][i]];
            sort_by_magnitude(sym3_eigenvalues(&m))
        })
        .collect();
    Ok(EigenField {
        spec: *v.spec(),
        sigma,
        values,
    })
}
