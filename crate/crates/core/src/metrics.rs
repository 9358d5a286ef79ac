//! Dice coefficient for binary masks and Adjusted Rand Index for instance labelings.
//!
//! ARI can be negative; its upper bound is 1. When its denominator vanishes (for
//! example both partitions are a single cluster) it is defined as 1 if the two
//! partitions are identical up to relabeling and 0 otherwise. Dice of two empty masks
//! is defined as 1.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::LabelVolume;

/// Joint label counts `m_ij` with their row (truth) and column (prediction) sums.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContingencyTable {
    pub joint: HashMap<(u32, u32), u64>,
    pub truth_sizes: HashMap<u32, u64>,
    pub pred_sizes: HashMap<u32, u64>,
    pub n: u64,
}

impl ContingencyTable {
    /// Counts over all voxels, or only over voxels whose truth label is nonzero.
    pub fn build(truth: &LabelVolume, pred: &LabelVolume, ignore_background: bool) -> Result<Self> {
        truth.ensure_same_shape(pred)?;
        let joint = truth
            .data()
            .par_chunks(1 << 16)
            .zip(pred.data().par_chunks(1 << 16))
            .fold(HashMap::new, |mut acc: HashMap<(u32, u32), u64>, (t, p)| {
                for (&a, &b) in t.iter().zip(p) {
                    if ignore_background && a == 0 {
                        continue;
                    }
                    *acc.entry((a, b)).or_insert(0) += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        let mut table = ContingencyTable { joint, ..Default::default() };
        for (&(a, b), &m) in &table.joint {
            *table.truth_sizes.entry(a).or_insert(0) += m;
            *table.pred_sizes.entry(b).or_insert(0) += m;
            table.n += m;
        }
        Ok(table)
    }

    /// True when every truth cluster maps to exactly one prediction cluster and back.
    pub fn partitions_identical(&self) -> bool {
        self.joint.len() == self.truth_sizes.len() && self.joint.len() == self.pred_sizes.len()
    }
}

fn pairs(m: u64) -> i128 {
    let m = m as i128;
    m * (m - 1) / 2
}

/// ARI from a contingency table. All pair counts are exact 128-bit integers; the single
/// final division is in f64.
pub fn ari_from_table(table: &ContingencyTable) -> Result<f64> {
    if table.n < 2 {
        return Err(Error::EmptyDomain(table.n));
    }
    let s: i128 = table.joint.values().map(|&m| pairs(m)).sum();
    let t1: i128 = table.truth_sizes.values().map(|&m| pairs(m)).sum();
    let t2: i128 = table.pred_sizes.values().map(|&m| pairs(m)).sum();
    let n2 = pairs(table.n);
    // (S - t1 t2 / N2) / ((t1 + t2) / 2 - t1 t2 / N2), scaled by 2 N2.
    let num = 2 * (s * n2 - t1 * t2);
    let den = (t1 + t2) * n2 - 2 * t1 * t2;
    if den == 0 {
        return Ok(if table.partitions_identical() { 1.0 } else { 0.0 });
    }
    Ok(ratio(num, den))
}

/// `num / den` rounded once: both operands are reduced by their gcd so that values
/// too large for exact f64 representation still divide accurately.
fn ratio(num: i128, den: i128) -> f64 {
    let (mut a, mut b) = (num.unsigned_abs(), den.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let g = a.max(1) as i128;
    (num / g) as f64 / (den / g) as f64
}

pub fn adjusted_rand_index(truth: &LabelVolume, pred: &LabelVolume, ignore_background: bool) -> Result<f64> {
    ari_from_table(&ContingencyTable::build(truth, pred, ignore_background)?)
}

/// Voxel counts of a binary comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl BinaryCounts {
    pub fn dice(&self) -> f64 {
        let den = 2 * self.tp + self.fp + self.fn_;
        if den == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / den as f64
        }
    }
}

fn check_binary(v: &LabelVolume) -> Result<()> {
    match v.data().iter().position(|&x| x > 1) {
        Some(index) => Err(Error::NonBinary { index, value: v.data()[index] }),
        None => Ok(()),
    }
}

pub fn binary_counts(truth: &LabelVolume, pred: &LabelVolume) -> Result<BinaryCounts> {
    truth.ensure_same_shape(pred)?;
    check_binary(truth)?;
    check_binary(pred)?;
    Ok(truth
        .data()
        .par_iter()
        .zip(pred.data().par_iter())
        .fold(BinaryCounts::default, |mut c, (&t, &p)| {
            match (t, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, 0) => c.fn_ += 1,
                _ => {}
            }
            c
        })
        .reduce(BinaryCounts::default, |a, b| BinaryCounts {
            tp: a.tp + b.tp,
            fp: a.fp + b.fp,
            fn_: a.fn_ + b.fn_,
        }))
}

/// `2 TP / (2 TP + FP + FN)` on 0/1 masks.
pub fn dice(truth: &LabelVolume, pred: &LabelVolume) -> Result<f64> {
    Ok(binary_counts(truth, pred)?.dice())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dice: f64,
    pub ari: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Voxels in the ARI evaluation domain.
    pub n: u64,
    pub ignore_background: bool,
}

/// Dice on the foreground masks (label ≠ 0) and ARI on the labels themselves.
pub fn evaluate(truth: &LabelVolume, pred: &LabelVolume, ignore_background: bool) -> Result<MetricReport> {
    truth.ensure_same_shape(pred)?;
    let counts = binary_counts(&truth.foreground(), &pred.foreground())?;
    let table = ContingencyTable::build(truth, pred, ignore_background)?;
    let ari = ari_from_table(&table)?;
    Ok(MetricReport {
        dice: counts.dice(),
        ari,
        tp: counts.tp,
        fp: counts.fp,
        fn_: counts.fn_,
        n: table.n,
        ignore_background,
    })
}
