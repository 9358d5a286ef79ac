use rayon::prelude::*;

use super::{hessian_at_scale, EigenField, ScaleSet, VesselnessParams};
use crate::error::Result;
use crate::volume::Volume;

/// Frangi vesselness of one magnitude-ordered eigenvalue triple, for bright tubes.
///
/// Zero when `λ2 > 0` or `λ3 > 0`, and when `λ2` or `λ3` is zero (the ratios are
/// undefined there). `c` must be positive.
#[inline]
pub fn vesselness_value(l: [f64; 3], alpha: f64, beta: f64, c: f64) -> f64 {
    let [l1, l2, l3] = l;
    if l2 > 0.0 || l3 > 0.0 || l2 == 0.0 || l3 == 0.0 {
        return 0.0;
    }
    let ra = l2.abs() / l3.abs();
    let rb = l1.abs() / (l2 * l3).abs().sqrt();
    let s2 = l1 * l1 + l2 * l2 + l3 * l3;
    let v = (1.0 - (-ra * ra / (2.0 * alpha * alpha)).exp())
        * (-rb * rb / (2.0 * beta * beta)).exp()
        * (1.0 - (-s2 / (2.0 * c * c)).exp());
    v.clamp(0.0, 1.0)
}

/// Vesselness at every voxel of one scale. With `c_auto`, `c` is half the largest
/// Frobenius norm in the field; a field that is zero everywhere gives zero response.
pub fn frangi_response(e: &EigenField, p: &VesselnessParams) -> Result<Volume> {
    p.validate()?;
    let c = if p.c_auto {
        let max_s = e
            .values
            .par_iter()
            .map(|l| (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt())
            .reduce(|| 0.0, f64::max);
        0.5 * max_s
    } else {
        p.c
    };
    if c <= 0.0 {
        return Ok(Volume::zeros(e.spec));
    }
    let data = e
        .values
        .par_iter()
        .map(|&l| vesselness_value(l, p.alpha, p.beta, c) as f32)
        .collect();
    Volume::from_vec(e.spec, data)
}

/// Voxel-wise maximum of [`frangi_response`] over all scales.
pub fn frangi_multiscale(v: &Volume, scales: &ScaleSet, p: &VesselnessParams) -> Result<Volume> {
    p.validate()?;
    let input;
    let v = if p.dark_fibers {
        input = v.map(|x| -x);
        &input
    } else {
        v
    };
    let mut best: Option<Volume> = None;
    for &sigma in scales.sigmas() {
        let response = frangi_response(&hessian_at_scale(v, sigma)?, p)?;
        best = Some(match best {
            None => response,
            Some(mut acc) => {
                acc.data_mut()
                    .par_iter_mut()
                    .zip(response.data().par_iter())
                    .for_each(|(a, &r)| *a = a.max(r));
                acc
            }
        });
    }
    Ok(best.expect("scale set is non-empty"))
}
