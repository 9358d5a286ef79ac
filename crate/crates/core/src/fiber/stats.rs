use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FiberModel;
use crate::geometry::{self, canonical_axis};
use crate::linalg::{sym3_eigenvalues, sym3_eigenvector, Sym3};
use crate::volume::LabelVolume;

/// Glass fiber density, g/cc.
pub const GLASS_DENSITY: f64 = 2.54;
/// Polymer matrix density, g/cc.
pub const MATRIX_DENSITY: f64 = 1.31;

pub const THETA_BIN_DEG: f64 = 5.0;
pub const PHI_BIN_DEG: f64 = 10.0;
pub const LENGTH_BIN_UM: f64 = 25.0;

/// Fixed-width histogram starting at `lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lower: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// `bins` bins of `bin_width` from `lower`; values past the last edge land in the
    /// last bin.
    pub fn build(values: impl IntoIterator<Item = f64>, lower: f64, bin_width: f64, bins: usize) -> Self {
        let mut counts = vec![0u64; bins];
        for v in values {
            let b = ((v - lower) / bin_width).floor().max(0.0) as usize;
            counts[b.min(bins - 1)] += 1;
        }
        Histogram { lower, bin_width, counts }
    }

    pub fn empty(lower: f64, bin_width: f64) -> Self {
        Histogram { lower, bin_width, counts: Vec::new() }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub fiber_count: usize,
    pub attempts_used: u64,
    pub min_length_um: f64,
    pub max_length_um: f64,
    pub mean_length_um: f64,
    pub box_volume_um3: f64,
    pub fiber_volume_um3: f64,
    pub volume_fraction: f64,
    pub weight_fraction: f64,
    pub length_histogram: Histogram,
    /// Elevation of the axis above the XY plane, degrees in [0, 90].
    pub theta_histogram: Histogram,
    /// Azimuth of the axis projection in the XY plane, degrees in [0, 360).
    pub phi_histogram: Histogram,
}

/// Weight fraction of fibers given their volume fraction and the two densities.
pub fn weight_fraction(volume_fraction: f64, fiber_density: f64, matrix_density: f64) -> f64 {
    let fiber_mass = fiber_density * volume_fraction;
    let total = fiber_mass + matrix_density * (1.0 - volume_fraction);
    if total > 0.0 {
        fiber_mass / total
    } else {
        0.0
    }
}

/// Elevation and azimuth in degrees of a canonical (z ≥ 0) unit axis.
pub fn axis_angles(axis: [f64; 3]) -> (f64, f64) {
    let theta = axis[2].clamp(-1.0, 1.0).asin().to_degrees();
    let mut phi = axis[1].atan2(axis[0]).to_degrees();
    if phi < 0.0 {
        phi += 360.0;
    }
    if phi >= 360.0 {
        phi -= 360.0;
    }
    (theta, phi)
}

pub fn model_statistics(m: &FiberModel) -> ModelStats {
    let box_volume = m.params.box_volume();
    if m.fibers.is_empty() {
        return ModelStats {
            fiber_count: 0,
            attempts_used: m.attempts_used,
            min_length_um: 0.0,
            max_length_um: 0.0,
            mean_length_um: 0.0,
            box_volume_um3: box_volume,
            fiber_volume_um3: 0.0,
            volume_fraction: 0.0,
            weight_fraction: 0.0,
            length_histogram: Histogram::empty(0.0, LENGTH_BIN_UM),
            theta_histogram: Histogram::empty(0.0, THETA_BIN_DEG),
            phi_histogram: Histogram::empty(0.0, PHI_BIN_DEG),
        };
    }

    let lengths: Vec<f64> = m.fibers.iter().map(|f| f.length()).collect();
    let min = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let max = lengths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
    let fiber_volume: f64 = m.fibers.iter().map(|f| f.volume()).sum();
    let vf = fiber_volume / box_volume;
    let angles: Vec<(f64, f64)> = m.fibers.iter().map(|f| axis_angles(f.axis())).collect();
    let length_bins = ((max / LENGTH_BIN_UM).floor() as usize + 1).max(1);

    ModelStats {
        fiber_count: m.fibers.len(),
        attempts_used: m.attempts_used,
        min_length_um: min,
        max_length_um: max,
        mean_length_um: mean,
        box_volume_um3: box_volume,
        fiber_volume_um3: fiber_volume,
        volume_fraction: vf,
        weight_fraction: weight_fraction(vf, GLASS_DENSITY, MATRIX_DENSITY),
        length_histogram: Histogram::build(lengths, 0.0, LENGTH_BIN_UM, length_bins),
        theta_histogram: Histogram::build(angles.iter().map(|a| a.0), 0.0, THETA_BIN_DEG, 18),
        phi_histogram: Histogram::build(angles.iter().map(|a| a.1), 0.0, PHI_BIN_DEG, 36),
    }
}

/// Length and orientation summary of the objects in a label volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub object_count: usize,
    pub voxel_size_um: f64,
    pub min_length_um: f64,
    pub max_length_um: f64,
    pub mean_length_um: f64,
    pub length_histogram: Histogram,
    pub theta_histogram: Histogram,
    pub phi_histogram: Histogram,
}

#[derive(Default)]
struct Moments {
    count: f64,
    sum: [f64; 3],
    outer: [f64; 6],
}

/// Per-label principal axis (largest-variance direction of the voxel centers) and
/// length (extent of the voxels along that axis plus one voxel edge).
pub fn label_statistics(labels: &LabelVolume) -> LabelStats {
    let grid = *labels.spec();
    let h = grid.voxel_size();
    let center = |i: usize| {
        let [x, y, z] = grid.coords(i);
        grid.voxel_center(x, y, z)
    };
    let mut moments: BTreeMap<u32, Moments> = BTreeMap::new();
    for (i, &l) in labels.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let p = center(i);
        let m = moments.entry(l).or_default();
        m.count += 1.0;
        for k in 0..3 {
            m.sum[k] += p[k];
        }
        let o = [p[0] * p[0], p[1] * p[1], p[2] * p[2], p[0] * p[1], p[0] * p[2], p[1] * p[2]];
        for k in 0..6 {
            m.outer[k] += o[k];
        }
    }
    let mut axes: BTreeMap<u32, ([f64; 3], [f64; 3])> = BTreeMap::new();
    for (&l, m) in &moments {
        let mean = m.sum.map(|s| s / m.count);
        let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
        let cov: Sym3 = std::array::from_fn(|k| {
            let (a, b) = pairs[k];
            m.outer[k] / m.count - mean[a] * mean[b]
        });
        let e = sym3_eigenvalues(&cov);
        let axis = if e[0] > e[1] {
            sym3_eigenvector(&cov, e[0]).unwrap_or([0.0, 0.0, 1.0])
        } else {
            [0.0, 0.0, 1.0]
        };
        axes.insert(l, (canonical_axis(axis), mean));
    }
    let mut extent: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for (i, &l) in labels.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (axis, mean) = axes[&l];
        let t = geometry::dot(geometry::sub(center(i), mean), axis);
        let e = extent.entry(l).or_insert((f64::INFINITY, f64::NEG_INFINITY));
        e.0 = e.0.min(t);
        e.1 = e.1.max(t);
    }

    let lengths: Vec<f64> = extent.values().map(|&(lo, hi)| hi - lo + h).collect();
    let angles: Vec<(f64, f64)> = axes.values().map(|&(a, _)| axis_angles(a)).collect();
    let (min, max, mean) = if lengths.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        (
            lengths.iter().copied().fold(f64::INFINITY, f64::min),
            lengths.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            lengths.iter().sum::<f64>() / lengths.len() as f64,
        )
    };
    let length_bins = (max / LENGTH_BIN_UM).floor() as usize + 1;
    LabelStats {
        object_count: lengths.len(),
        voxel_size_um: h,
        min_length_um: min,
        max_length_um: max,
        mean_length_um: mean,
        length_histogram: Histogram::build(lengths, 0.0, LENGTH_BIN_UM, length_bins),
        theta_histogram: Histogram::build(angles.iter().map(|a| a.0), 0.0, THETA_BIN_DEG, 18),
        phi_histogram: Histogram::build(angles.iter().map(|a| a.1), 0.0, PHI_BIN_DEG, 36),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{Fiber, ModelParams};

    fn model(fibers: Vec<Fiber>) -> FiberModel {
        FiberModel { params: ModelParams::default(), fibers, attempts_used: 0 }
    }

    #[test]
    fn empty_model_is_all_zero() {
        let s = model_statistics(&model(vec![]));
        assert_eq!(s.fiber_count, 0);
        assert_eq!(s.volume_fraction, 0.0);
        assert_eq!(s.weight_fraction, 0.0);
        assert!(s.theta_histogram.counts.is_empty() && s.phi_histogram.counts.is_empty());
    }

    #[test]
    fn weight_fraction_at_reference_volume_fraction() {
        // 2.54*0.054 / (2.54*0.054 + 1.31*0.946)
        let expected = 0.13716 / (0.13716 + 1.23926);
        let wf = weight_fraction(0.054, GLASS_DENSITY, MATRIX_DENSITY);
        assert!((wf - expected).abs() < 1e-12);
        assert!((wf - 0.0997).abs() < 1e-4);
    }

    #[test]
    fn single_fiber_fraction() {
        let f = Fiber::new(1, [1000.0, 1000.0, 750.0], [1000.0, 1000.0, 1250.0], 6.5).unwrap();
        let s = model_statistics(&model(vec![f]));
        let expected = std::f64::consts::PI * 42.25 * 500.0 / 8e9;
        assert!((s.volume_fraction - expected).abs() <= 1e-15);
        assert!((s.volume_fraction - 8.296e-6).abs() < 1e-9);
        assert_eq!(s.theta_histogram.counts[17], 1);
        assert_eq!(s.mean_length_um, 500.0);
    }

    #[test]
    fn angle_conventions() {
        let (t, p) = axis_angles([0.0, 0.0, 1.0]);
        assert!((t - 90.0).abs() < 1e-12 && p == 0.0);
        let (t, p) = axis_angles([0.0, 1.0, 0.0]);
        assert!(t.abs() < 1e-12 && (p - 90.0).abs() < 1e-12);
        let (_, p) = axis_angles([0.0, -1.0, 1e-9]);
        assert!((p - 270.0).abs() < 1e-9);
        let s = 0.5f64.sqrt();
        let (t, p) = axis_angles([-s, 0.0, s]);
        assert!((t - 45.0).abs() < 1e-9 && (p - 180.0).abs() < 1e-9);
    }

    #[test]
    fn histogram_overflow_goes_to_last_bin() {
        let h = Histogram::build([0.0, 4.9, 5.0, 90.0], 0.0, 5.0, 18);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[17], 1);
        assert_eq!(h.total(), 4);
    }

    #[test]
    fn label_rods_give_lengths_and_angles() {
        use crate::volume::GridSpec;
        let grid = GridSpec::cube(16, 2.0).unwrap();
        let l = LabelVolume::from_fn(grid, |x, y, z| {
            if y == 3 && z == 3 && (2..12).contains(&x) {
                5
            } else if x == 10 && y == 10 && (1..9).contains(&z) {
                2
            } else {
                0
            }
        });
        let s = label_statistics(&l);
        assert_eq!(s.object_count, 2);
        assert_eq!(s.min_length_um, 16.0);
        assert_eq!(s.max_length_um, 20.0);
        assert_eq!(s.theta_histogram.counts[0], 1);
        assert_eq!(s.theta_histogram.counts[17], 1);
        assert_eq!(label_statistics(&LabelVolume::zeros(grid)).object_count, 0);
    }
}
