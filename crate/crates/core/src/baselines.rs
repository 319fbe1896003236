//! Reference selectors: the unpruned bagging vote and Kappa pruning.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mask::EnsembleMask;
use crate::predictions::LabelMatrix;
use crate::vote::{evaluate, EnsembleResult};

/// Counts of predicted label pairs for two classifiers: `counts[p * l + q]`
/// is the number of instances where the first says `p` and the second `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiClassContingency {
    pub labels: usize,
    pub counts: Vec<usize>,
    pub m: usize,
}

impl MultiClassContingency {
    pub fn from_rows(row_i: &[usize], row_j: &[usize], labels: usize) -> Result<Self> {
        if row_i.len() != row_j.len() {
            return Err(Error::LengthMismatch { expected: row_i.len(), actual: row_j.len() });
        }
        let mut counts = alloc::vec![0usize; labels * labels];
        for (&p, &q) in row_i.iter().zip(row_j) {
            if p >= labels || q >= labels {
                return Err(Error::LabelOutOfRange { label: p.max(q), classes: labels });
            }
            counts[p * labels + q] += 1;
        }
        Ok(Self { labels, counts, m: row_i.len() })
    }

    pub fn from_counts(labels: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != labels * labels {
            return Err(Error::LengthMismatch { expected: labels * labels, actual: counts.len() });
        }
        let m = counts.iter().sum();
        Ok(Self { labels, counts, m })
    }

    pub fn transposed(&self) -> Self {
        let l = self.labels;
        let mut counts = alloc::vec![0usize; l * l];
        for p in 0..l {
            for q in 0..l {
                counts[q * l + p] = self.counts[p * l + q];
            }
        }
        Self { labels: l, counts, m: self.m }
    }
}

/// Cohen's κ = (Θ₁ − Θ₂)/(1 − Θ₂). When Θ₂ = 1 the value is 1 on full
/// agreement and 0 otherwise. An empty table scores 0.
pub fn kappa(ct: &MultiClassContingency) -> f64 {
    if ct.m == 0 {
        return 0.0;
    }
    let (l, m) = (ct.labels, ct.m as f64);
    let agree: usize = (0..l).map(|p| ct.counts[p * l + p]).sum();
    let theta1 = agree as f64 / m;
    let mut theta2 = 0.0;
    for p in 0..l {
        let row: usize = ct.counts[p * l..(p + 1) * l].iter().sum();
        let col: usize = (0..l).map(|q| ct.counts[q * l + p]).sum();
        theta2 += (row as f64 / m) * (col as f64 / m);
    }
    if theta2 >= 1.0 {
        return if agree == ct.m { 1.0 } else { 0.0 };
    }
    if agree == ct.m {
        return 1.0;
    }
    (theta1 - theta2) / (1.0 - theta2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaPair {
    pub i: usize,
    pub j: usize,
    pub kappa: f64,
}

/// κ for every pair `i < j` of the matrix rows.
pub fn kappa_pairs(matrix: &LabelMatrix) -> Vec<KappaPair> {
    let n = matrix.n_classifiers();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let ct = MultiClassContingency::from_rows(matrix.row(i), matrix.row(j), matrix.class_count())
                .expect("rows of one matrix share width and label range");
            out.push(KappaPair { i, j, kappa: kappa(&ct) });
        }
    }
    out
}

/// Walks pairs in ascending κ (ties by (i, j)), adding both members, until
/// at least `budget` classifiers are active.
pub fn prune_by_kappa(pairs: &[KappaPair], pool_size: usize, budget: usize) -> Result<EnsembleMask> {
    if budget < 2 || budget > pool_size {
        return Err(invalid(alloc::format!("kappa budget {budget} must lie in [2, {pool_size}]")));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|x, y| x.kappa.partial_cmp(&y.kappa).unwrap_or(Ordering::Equal).then((x.i, x.j).cmp(&(y.i, y.j))));
    let mut mask = EnsembleMask::empty(pool_size);
    let mut active = 0;
    for p in sorted {
        for c in [p.i, p.j] {
            if !mask.get(c) {
                mask.set(c, true);
                active += 1;
            }
        }
        if active >= budget {
            return Ok(mask);
        }
    }
    Err(invalid("pair list does not reach the kappa budget"))
}

pub fn kappa_prune(matrix: &LabelMatrix, budget: usize) -> Result<EnsembleMask> {
    prune_by_kappa(&kappa_pairs(matrix), matrix.n_classifiers(), budget)
}

/// Majority vote of the whole pool.
pub fn bagging_full(matrix: &LabelMatrix) -> Result<EnsembleResult> {
    evaluate(&EnsembleMask::full(matrix.n_classifiers()), matrix)
}
