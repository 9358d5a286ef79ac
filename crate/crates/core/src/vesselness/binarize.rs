use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{LabelVolume, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binarization {
    Fixed(f32),
    Otsu,
}

impl Default for Binarization {
    fn default() -> Self {
        Binarization::Otsu
    }
}

const OTSU_BINS: usize = 256;

/// Otsu's threshold over a 256-bin histogram spanning `[min, max]`.
///
/// The returned value is the lower edge of the first bin of the upper class, for the
/// first split that maximizes the between-class variance.
pub fn otsu_threshold(v: &Volume) -> Result<f32> {
    let (lo, hi) = v.min_max();
    if !(hi > lo) {
        return Err(Error::DegenerateHistogram);
    }
    let (lo, hi) = (lo as f64, hi as f64);
    let width = (hi - lo) / OTSU_BINS as f64;
    let mut hist = [0u64; OTSU_BINS];
    for &x in v.data() {
        let b = (((x as f64 - lo) / width) as usize).min(OTSU_BINS - 1);
        hist[b] += 1;
    }
    let total = v.data().len() as f64;
    let centers: Vec<f64> = (0..OTSU_BINS).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let sum_all: f64 = hist.iter().zip(&centers).map(|(&h, &c)| h as f64 * c).sum();

    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best_split, mut best_var) = (1, -1.0);
    for split in 1..OTSU_BINS {
        w0 += hist[split - 1] as f64;
        sum0 += hist[split - 1] as f64 * centers[split - 1];
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_split = split;
        }
    }
    Ok((lo + best_split as f64 * width) as f32)
}

/// 0/1 mask: 1 where the value is at least the threshold.
pub fn binarize(v: &Volume, method: Binarization) -> Result<LabelVolume> {
    let threshold = match method {
        Binarization::Fixed(t) if t.is_finite() => t,
        Binarization::Fixed(t) => {
            return Err(Error::InvalidParam(format!("threshold must be finite, got {t}")))
        }
        Binarization::Otsu => otsu_threshold(v)?,
    };
    Ok(v.map(|x| u32::from(x >= threshold)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub labels: LabelVolume,
    pub count: u32,
}

/// 26-connected components of a 0/1 mask, numbered 1..=K in order of each
/// component's first voxel in linear-index order.
pub fn connected_components(b: &LabelVolume) -> Result<Components> {
    if let Some((index, &value)) = b.data().iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(Error::NonBinary { index, value });
    }
    let grid = *b.spec();
    let mask = b.data();
    let mut labels = LabelVolume::zeros(grid);
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if mask[start] == 0 || labels.data()[start] != 0 {
            continue;
        }
        count += 1;
        labels.data_mut()[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for n in grid.neighbors26(i) {
                if mask[n] == 1 && labels.data()[n] == 0 {
                    labels.data_mut()[n] = count;
                    queue.push_back(n);
                }
            }
        }
    }
    Ok(Components { labels, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::GridSpec;

    #[test]
    fn fixed_threshold() {
        let v = Volume::from_vec(GridSpec::new([2, 1, 1], 1.0).unwrap(), vec![0.2, 0.7]).unwrap();
        assert_eq!(binarize(&v, Binarization::Fixed(0.5)).unwrap().data(), &[0, 1]);
        assert!(binarize(&v, Binarization::Fixed(f32::NAN)).is_err());
    }

    #[test]
    fn otsu_on_bimodal_volume() {
        let spec = GridSpec::cube(8, 1.0).unwrap();
        let v = Volume::from_fn(spec, |x, _, _| if x < 4 { 0.1 } else { 0.9 });
        let t = otsu_threshold(&v).unwrap();
        assert!(t > 0.1 && t <= 0.9, "{t}");
        let b = binarize(&v, Binarization::Otsu).unwrap();
        for (i, &m) in b.data().iter().enumerate() {
            assert_eq!(m, u32::from(spec.coords(i)[0] >= 4));
        }
    }

    /// Exhaustive scan: evaluate the between-class variance directly from the voxel
    /// values for each of the 256 candidate thresholds.
    #[test]
    fn otsu_matches_exhaustive_scan() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(4);
        let spec = GridSpec::cube(10, 1.0).unwrap();
        let data: Vec<f32> = (0..spec.len())
            .map(|i| if i % 3 == 0 { rng.random_range(2.0..3.0) } else { rng.random_range(0.0..1.2) })
            .collect();
        let v = Volume::from_vec(spec, data.clone()).unwrap();
        let t = otsu_threshold(&v).unwrap();
        let (lo, hi) = v.min_max();
        let w = (hi - lo) as f64 / 256.0;
        let center = |x: f32| {
            let b = (((x - lo) as f64 / w) as usize).min(255);
            lo as f64 + (b as f64 + 0.5) * w
        };
        let score = |k: usize| {
            let thr = lo as f64 + k as f64 * w;
            let (a, b): (Vec<f64>, Vec<f64>) = data.iter().map(|&x| center(x)).partition(|&c| c < thr);
            if a.is_empty() || b.is_empty() {
                return -1.0;
            }
            let ma = a.iter().sum::<f64>() / a.len() as f64;
            let mb = b.iter().sum::<f64>() / b.len() as f64;
            a.len() as f64 * b.len() as f64 * (ma - mb).powi(2)
        };
        let best = (1..256).map(score).fold(f64::MIN, f64::max);
        let k = ((t - lo) as f64 / w).round() as usize;
        assert!((score(k) - best).abs() <= 1e-9 * best);
        assert!(t > 1.0 && t < 2.0, "{t}");
    }

    #[test]
    fn otsu_degenerate() {
        let v = Volume::filled(GridSpec::cube(3, 1.0).unwrap(), 0.4);
        assert!(matches!(otsu_threshold(&v), Err(Error::DegenerateHistogram)));
        assert!(binarize(&v, Binarization::Otsu).is_err());
    }

    #[test]
    fn components_basic() {
        let spec = GridSpec::cube(6, 1.0).unwrap();
        let empty = LabelVolume::zeros(spec);
        let c = connected_components(&empty).unwrap();
        assert_eq!(c.count, 0);
        assert_eq!(c.labels, empty);

        let mut two = LabelVolume::zeros(spec);
        two.set(0, 0, 0, 1);
        two.set(5, 5, 5, 1);
        assert_eq!(connected_components(&two).unwrap().count, 2);

        let mut diag = LabelVolume::zeros(spec);
        diag.set(0, 0, 0, 1);
        diag.set(1, 1, 1, 1);
        assert_eq!(connected_components(&diag).unwrap().count, 1);
    }

    #[test]
    fn components_numbered_in_scan_order() {
        let spec = GridSpec::new([6, 3, 1], 1.0).unwrap();
        // row 0: . . . . X .   row 2: X X . . . .
        let mut b = LabelVolume::zeros(spec);
        b.set(4, 0, 0, 1);
        b.set(0, 2, 0, 1);
        b.set(1, 2, 0, 1);
        let c = connected_components(&b).unwrap();
        assert_eq!(c.count, 2);
        assert_eq!(c.labels.get(4, 0, 0), 1);
        assert_eq!(c.labels.get(0, 2, 0), 2);
        assert_eq!(c.labels.get(1, 2, 0), 2);
    }

    #[test]
    fn components_reject_non_binary() {
        let mut b = LabelVolume::zeros(GridSpec::cube(2, 1.0).unwrap());
        b.set(1, 0, 0, 2);
        assert!(matches!(connected_components(&b), Err(Error::NonBinary { index: 1, value: 2 })));
    }
}
