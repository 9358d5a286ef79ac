#![allow(dead_code)]

use std::collections::HashMap;

use fiberseg_core::fiber::ModelParams;
use fiberseg_core::{GridSpec, LabelVolume, Volume};

/// ARI from pair agreements, visiting every unordered voxel pair:
/// `a` same/same, `b` same/different, `c` different/same, `d` different/different.
pub fn brute_force_ari(truth: &[u32], pred: &[u32]) -> f64 {
    let (mut a, mut b, mut c, mut d) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..truth.len() {
        for j in i + 1..truth.len() {
            match (truth[i] == truth[j], pred[i] == pred[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    2.0 * (a * d - b * c) / den
}

/// Dice by set counting: `2 |A ∩ B| / (|A| + |B|)` from index sets.
pub fn set_dice(truth: &[u32], pred: &[u32]) -> f64 {
    let a: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == 1).collect();
    let b: std::collections::HashSet<usize> = (0..pred.len()).filter(|&i| pred[i] == 1).collect();
    let inter = a.iter().filter(|i| b.contains(i)).count();
    if a.is_empty() && b.is_empty() {
        1.0
    } else {
        2.0 * inter as f64 / (a.len() + b.len()) as f64
    }
}

/// Number of uses of each undirected edge in a binary STL, vertices keyed by bit pattern.
pub fn stl_edge_uses(bytes: &[u8]) -> (u32, HashMap<([u32; 3], [u32; 3]), u32>) {
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap());
    assert_eq!(bytes.len(), 84 + 50 * count as usize);
    let mut edges = HashMap::new();
    for t in 0..count as usize {
        let base = 84 + 50 * t + 12;
        let vertex = |k: usize| -> [u32; 3] {
            let o = base + 12 * k;
            [0, 1, 2].map(|c| u32::from_le_bytes(bytes[o + 4 * c..o + 4 * c + 4].try_into().unwrap()))
        };
        let v = [vertex(0), vertex(1), vertex(2)];
        for (p, q) in [(0, 1), (1, 2), (2, 0)] {
            let key = if v[p] < v[q] { (v[p], v[q]) } else { (v[q], v[p]) };
            *edges.entry(key).or_insert(0) += 1;
        }
    }
    (count, edges)
}

pub fn gaussian_tube(n: usize, width: f32) -> Volume {
    let c = (n / 2) as f32;
    Volume::from_fn(GridSpec::cube(n, 1.0).unwrap(), move |x, y, _| {
        let d2 = (x as f32 - c).powi(2) + (y as f32 - c).powi(2);
        (-d2 / (2.0 * width * width)).exp()
    })
}

pub fn gaussian_plate(n: usize, width: f32) -> Volume {
    let c = (n / 2) as f32;
    Volume::from_fn(GridSpec::cube(n, 1.0).unwrap(), move |x, _, _| {
        (-(x as f32 - c).powi(2) / (2.0 * width * width)).exp()
    })
}

pub fn gaussian_blob(n: usize, width: f32) -> Volume {
    let c = (n / 2) as f32;
    Volume::from_fn(GridSpec::cube(n, 1.0).unwrap(), move |x, y, z| {
        let d2 = (x as f32 - c).powi(2) + (y as f32 - c).powi(2) + (z as f32 - c).powi(2);
        (-d2 / (2.0 * width * width)).exp()
    })
}

/// Binary bright cylinder of radius `r` voxels along z through the grid center.
pub fn binary_cylinder(n: usize, r: f32, inside: f32, outside: f32) -> Volume {
    let c = (n as f32 - 1.0) / 2.0;
    Volume::from_fn(GridSpec::cube(n, 1.0).unwrap(), move |x, y, _| {
        let d2 = (x as f32 - c).powi(2) + (y as f32 - c).powi(2);
        if d2 <= r * r { inside } else { outside }
    })
}

/// Disk of amplitude 1 and radius `r` pixels centered on an `n × n` grid.
pub fn disk(n: usize, r: f64) -> Vec<f64> {
    let c = n as f64 / 2.0;
    (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as f64 + 0.5 - c, (i / n) as f64 + 0.5 - c);
            if x * x + y * y <= r * r { 1.0 } else { 0.0 }
        })
        .collect()
}

/// Interior RMSE of a disk reconstruction over pixels within `0.9 r` of the center.
pub fn disk_interior_rmse(recon: &[f64], n: usize, r: f64) -> f64 {
    let c = n as f64 / 2.0;
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..n * n {
        let (x, y) = ((i % n) as f64 + 0.5 - c, (i / n) as f64 + 0.5 - c);
        if (x * x + y * y).sqrt() <= 0.9 * r {
            sum += (recon[i] - 1.0).powi(2);
            count += 1;
        }
    }
    (sum / count as f64).sqrt()
}

/// The desk-scale model: a 128³ grid at 3.9 μm, 6.5 μm fibers at 5.4 % volume
/// fraction. Lengths are scaled to the 499.2 μm box.
pub fn desk_params(seed: u64) -> (ModelParams, GridSpec) {
    let grid = GridSpec::cube(128, 3.9).unwrap();
    let params = ModelParams {
        box_edge: 128.0 * 3.9,
        radius: 6.5,
        mean_length: 125.0,
        length_stddev: 25.0,
        target_fraction: 0.054,
        max_attempts: 150_000,
        placement_tries: 1000,
        seed,
    };
    (params, grid)
}

pub fn labels_from(values: Vec<u32>, dims: [usize; 3]) -> LabelVolume {
    LabelVolume::from_vec(GridSpec::new(dims, 1.0).unwrap(), values).unwrap()
}

/// Angle in degrees between two unoriented axes.
pub fn axis_angle_deg(a: [f32; 3], b: [f64; 3]) -> f64 {
    let dot = (a[0] as f64 * b[0] + a[1] as f64 * b[1] + a[2] as f64 * b[2]).abs();
    let na = (a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>()).sqrt();
    let nb = (b.iter().map(|x| x * x).sum::<f64>()).sqrt();
    (dot / (na * nb)).clamp(0.0, 1.0).acos().to_degrees()
}

/// One-sample Kolmogorov–Smirnov statistic against the uniform law on [0, 1].
pub fn ks_uniform(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}
