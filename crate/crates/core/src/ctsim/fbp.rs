//! Parallel-beam Radon transform and Ram-Lak filtered back projection, slice by slice.
//!
//! Slice coordinates are voxel indices with the rotation center at
//! `((nx - 1) / 2, (ny - 1) / 2)`. Detector bins have unit spacing and are centered on
//! the rotation axis; there are enough of them to cover the slice diagonal.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Projections of one slice at angles `k * π / n_angles`, row-major by angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub n_angles: usize,
    pub n_detectors: usize,
    pub data: Vec<f64>,
}

impl Sinogram {
    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * PI / self.n_angles as f64
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_detectors..(k + 1) * self.n_detectors]
    }

    fn center(&self) -> f64 {
        (self.n_detectors as f64 - 1.0) / 2.0
    }

    /// Dumps the sinogram as an f32 raw file plus a JSON header next to it.
    pub fn write(&self, stem: impl AsRef<Path>) -> Result<()> {
        #[derive(Serialize)]
        struct Header {
            n_angles: usize,
            n_detectors: usize,
            dtype: &'static str,
            order: &'static str,
            endianness: &'static str,
        }
        let (json, raw) = crate::volume::stem_paths(stem.as_ref());
        let header = Header {
            n_angles: self.n_angles,
            n_detectors: self.n_detectors,
            dtype: "f32",
            order: "detector-fastest",
            endianness: "little",
        };
        std::fs::write(&json, serde_json::to_string_pretty(&header).expect("serializes"))
            .map_err(|e| Error::io(&json, e))?;
        let bytes: Vec<u8> = self.data.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        std::fs::write(&raw, bytes).map_err(|e| Error::io(&raw, e))
    }
}

pub fn detector_count(nx: usize, ny: usize) -> usize {
    ((nx as f64).hypot(ny as f64)).ceil() as usize + 3
}

#[inline]
fn bilinear(slice: &[f64], nx: usize, ny: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let at = |xi: i64, yi: i64| -> f64 {
        if xi >= 0 && yi >= 0 && (xi as usize) < nx && (yi as usize) < ny {
            slice[xi as usize + nx * yi as usize]
        } else {
            0.0
        }
    };
    (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x0 + 1, y0))
        + fy * ((1.0 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1))
}

/// Line integrals along rays perpendicular to each detector direction, sampled every
/// half voxel with bilinear interpolation; zero outside the slice.
pub fn forward_project(slice: &[f64], nx: usize, ny: usize, n_angles: usize) -> Sinogram {
    let n_det = detector_count(nx, ny);
    let (cx, cy) = ((nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0);
    let cdet = (n_det as f64 - 1.0) / 2.0;
    let dt = 0.5;
    let half = (n_det as f64 / 2.0 / dt).ceil() as i64;
    let mut data = vec![0.0; n_angles * n_det];
    data.par_chunks_mut(n_det).enumerate().for_each(|(k, row)| {
        let theta = k as f64 * PI / n_angles as f64;
        let (c, s) = (theta.cos(), theta.sin());
        for (d, out) in row.iter_mut().enumerate() {
            let u = d as f64 - cdet;
            let mut acc = 0.0;
            for step in -half..=half {
                let t = step as f64 * dt;
                let x = cx + u * c - t * s;
                let y = cy + u * s + t * c;
                acc += bilinear(slice, nx, ny, x, y);
            }
            *out = acc * dt;
        }
    });
    Sinogram {
        n_angles,
        n_detectors: n_det,
        data,
    }
}

/// Ram-Lak filtering in the frequency domain on zero-padded projections. The frequency
/// response is the transform of the band-limited spatial ramp kernel
/// `h(0) = 1/4, h(odd n) = -1 / (π n)², h(even n) = 0`.
pub fn ramp_filter(sino: &Sinogram) -> Sinogram {
    let n = sino.n_detectors;
    let padded = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(padded);
    let ifft = planner.plan_fft_inverse(padded);

    let mut kernel = vec![Complex::new(0.0, 0.0); padded];
    kernel[0].re = 0.25;
    for k in 1..padded / 2 {
        if k % 2 == 1 {
            let v = -1.0 / (PI * PI * (k * k) as f64);
            kernel[k].re = v;
            kernel[padded - k].re = v;
        }
    }
    fft.process(&mut kernel);
    let response: Vec<f64> = kernel.iter().map(|c| c.re).collect();

    let mut data = vec![0.0; sino.data.len()];
    data.par_chunks_mut(n).enumerate().for_each(|(k, out)| {
        let mut buf: Vec<Complex<f64>> = sino
            .row(k)
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(padded)
            .collect();
        fft.process(&mut buf);
        for (b, &h) in buf.iter_mut().zip(&response) {
            *b *= h;
        }
        ifft.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re / padded as f64;
        }
    });
    Sinogram { data, ..sino.clone() }
}

/// Smears each filtered projection back across the slice with linear interpolation,
/// scaled by `π / n_angles`.
pub fn backproject_filtered(filtered: &Sinogram, nx: usize, ny: usize) -> Vec<f64> {
    let (cx, cy) = ((nx as f64 - 1.0) / 2.0, (ny as f64 - 1.0) / 2.0);
    let cdet = filtered.center();
    let trig: Vec<(f64, f64)> = (0..filtered.n_angles)
        .map(|k| {
            let a = filtered.angle(k);
            (a.cos(), a.sin())
        })
        .collect();
    let n_det = filtered.n_detectors;
    let scale = PI / filtered.n_angles as f64;
    let mut out = vec![0.0; nx * ny];
    out.par_chunks_mut(nx).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let mut acc = 0.0;
            for (k, &(c, s)) in trig.iter().enumerate() {
                let pos = dx * c + dy * s + cdet;
                let i0 = pos.floor();
                let f = pos - i0;
                let i0 = i0 as i64;
                let p = filtered.row(k);
                let at = |i: i64| if i >= 0 && (i as usize) < n_det { p[i as usize] } else { 0.0 };
                acc += (1.0 - f) * at(i0) + f * at(i0 + 1);
            }
            *o = acc * scale;
        }
    });
    out
}

pub fn reconstruct_slice(sino: &Sinogram, nx: usize, ny: usize) -> Vec<f64> {
    backproject_filtered(&ramp_filter(sino), nx, ny)
}

/// Projects and reconstructs every z-slice; the output keeps the input grid.
pub fn simulate_fbp(v: &Volume, n_angles: usize) -> Result<Volume> {
    if n_angles < 1 {
        return Err(Error::InvalidParam("n_angles must be >= 1".into()));
    }
    let [nx, ny, _] = v.dims();
    let plane = nx * ny;
    let slices: Vec<Vec<f64>> = v
        .data()
        .par_chunks(plane)
        .map(|slice| {
            let s: Vec<f64> = slice.iter().map(|&x| x as f64).collect();
            reconstruct_slice(&forward_project(&s, nx, ny, n_angles), nx, ny)
        })
        .collect();
    Volume::from_vec(
        *v.spec(),
        slices.into_iter().flatten().map(|x| x as f32).collect(),
    )
}
