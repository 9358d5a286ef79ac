//! Sampled Gaussian derivative kernels and separable convolution along one axis of a
//! dense 3D field, with half-sample symmetric (reflect) boundaries.
//!
//! Fields are plain `f64` buffers in the volume linear order `x + nx * (y + ny * z)`.

use rayon::prelude::*;

/// Kernel taps for offsets `-radius..=radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub taps: Vec<f64>,
    pub radius: usize,
}

impl Kernel {
    fn offsets(radius: usize) -> impl Iterator<Item = f64> {
        (0..=2 * radius).map(move |k| k as f64 - radius as f64)
    }

    /// Truncation at ±4σ.
    pub fn radius_for(sigma: f64) -> usize {
        (4.0 * sigma).ceil().max(1.0) as usize
    }

    /// Smoothing kernel, sums to 1.
    pub fn gaussian(sigma: f64) -> Self {
        let radius = Self::radius_for(sigma);
        let raw: Vec<f64> = Self::offsets(radius)
            .map(|x| (-0.5 * x * x / (sigma * sigma)).exp())
            .collect();
        let sum: f64 = raw.iter().sum();
        Kernel {
            taps: raw.into_iter().map(|v| v / sum).collect(),
            radius,
        }
    }

    /// First derivative, antisymmetric, scaled so that the response to `f(x) = x` is 1.
    pub fn gaussian_d1(sigma: f64) -> Self {
        let g = Self::gaussian(sigma);
        let raw: Vec<f64> = Self::offsets(g.radius)
            .zip(&g.taps)
            .map(|(x, &w)| -x / (sigma * sigma) * w)
            .collect();
        // (k * f)(i) = Σ k(j) f(i - j), so a ramp gives -Σ j k(j).
        let moment: f64 = Self::offsets(g.radius).zip(&raw).map(|(x, &w)| -x * w).sum();
        Kernel {
            taps: raw.into_iter().map(|v| v / moment).collect(),
            radius: g.radius,
        }
    }

    /// Second derivative, mean-subtracted so it sums to 0 and scaled so that the
    /// response to `f(x) = x²` is 2.
    pub fn gaussian_d2(sigma: f64) -> Self {
        let g = Self::gaussian(sigma);
        let s2 = sigma * sigma;
        let mut raw: Vec<f64> = Self::offsets(g.radius)
            .zip(&g.taps)
            .map(|(x, &w)| (x * x / (s2 * s2) - 1.0 / s2) * w)
            .collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        raw.iter_mut().for_each(|v| *v -= mean);
        let moment: f64 = Self::offsets(g.radius).zip(&raw).map(|(x, &w)| x * x * w).sum();
        Kernel {
            taps: raw.into_iter().map(|v| 2.0 * v / moment).collect(),
            radius: g.radius,
        }
    }
}

/// Reflects an out-of-range index back into `0..n` (`... c b a | a b c ...`), for any
/// distance outside the range.
#[inline]
pub fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

/// Convolves every line along `axis` (0 = x, 1 = y, 2 = z) with `kernel`.
pub fn convolve_axis(data: &[f64], dims: [usize; 3], axis: usize, kernel: &Kernel) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let mut out = vec![0.0; data.len()];
    let n = dims[axis];
    let r = kernel.radius as i64;
    let taps = &kernel.taps;

    let convolve_line = |line: &[f64], dst: &mut [f64]| {
        for (i, d) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &w) in taps.iter().enumerate() {
                // taps[k] is the weight for offset j = k - r, applied to f(i - j).
                let src = i as i64 - (k as i64 - r);
                let idx = if src >= 0 && (src as usize) < n {
                    src as usize
                } else {
                    reflect(src, n)
                };
                acc += w * line[idx];
            }
            *d = acc;
        }
    };

    match axis {
        0 => {
            out.par_chunks_mut(nx)
                .zip(data.par_chunks(nx))
                .for_each(|(dst, src)| convolve_line(src, dst));
        }
        1 | 2 => {
            // Gather strided lines into a contiguous buffer per x-y plane (axis 1) or
            // per x-z column set (axis 2).
            let stride = if axis == 1 { nx } else { nx * ny };
            let outer = if axis == 1 { nz } else { ny };
            let results: Vec<(usize, Vec<f64>)> = (0..outer)
                .into_par_iter()
                .map(|o| {
                    let mut line = vec![0.0; n];
                    let mut dst = vec![0.0; n];
                    let mut block = vec![0.0; nx * n];
                    for x in 0..nx {
                        let base = if axis == 1 { x + nx * ny * o } else { x + nx * o };
                        for (i, l) in line.iter_mut().enumerate() {
                            *l = data[base + i * stride];
                        }
                        convolve_line(&line, &mut dst);
                        block[x * n..(x + 1) * n].copy_from_slice(&dst);
                    }
                    (o, block)
                })
                .collect();
            for (o, block) in results {
                for x in 0..nx {
                    let base = if axis == 1 { x + nx * ny * o } else { x + nx * o };
                    for i in 0..n {
                        out[base + i * stride] = block[x * n + i];
                    }
                }
            }
        }
        _ => panic!("axis must be 0, 1 or 2"),
    }
    out
}

/// Applies `kx`, `ky`, `kz` along x, y, z in turn (z first).
pub fn separable(data: &[f64], dims: [usize; 3], kx: &Kernel, ky: &Kernel, kz: &Kernel) -> Vec<f64> {
    let t = convolve_axis(data, dims, 2, kz);
    let t = convolve_axis(&t, dims, 1, ky);
    convolve_axis(&t, dims, 0, kx)
}

/// Isotropic Gaussian smoothing; `sigma` in voxels, `sigma == 0` copies the input.
pub fn gaussian_smooth(data: &[f64], dims: [usize; 3], sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return data.to_vec();
    }
    let k = Kernel::gaussian(sigma);
    separable(data, dims, &k, &k, &k)
}
