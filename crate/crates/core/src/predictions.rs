//! Label matrices of pool predictions and pairwise hit/miss statistics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Val1,
    Val2,
    Test,
}

/// Predictions of every pool member over one split, classifier-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    split: SplitTag,
    class_count: usize,
    n_classifiers: usize,
    truth: Vec<usize>,
    preds: Vec<usize>,
}

impl LabelMatrix {
    pub fn new(split: SplitTag, class_count: usize, truth: Vec<usize>, rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = truth.len();
        let mut preds = Vec::with_capacity(rows.len() * m);
        for row in &rows {
            if row.len() != m {
                return Err(Error::LengthMismatch { expected: m, actual: row.len() });
            }
            preds.extend_from_slice(row);
        }
        if let Some(&label) = preds.iter().chain(&truth).find(|&&l| l >= class_count) {
            return Err(Error::LabelOutOfRange { label, classes: class_count });
        }
        Ok(Self { split, class_count, n_classifiers: rows.len(), truth, preds })
    }

    pub fn split(&self) -> SplitTag {
        self.split
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn n_classifiers(&self) -> usize {
        self.n_classifiers
    }

    pub fn n_instances(&self) -> usize {
        self.truth.len()
    }

    pub fn truth(&self) -> &[usize] {
        &self.truth
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        let m = self.truth.len();
        &self.preds[i * m..(i + 1) * m]
    }

    pub fn accuracies(&self) -> Vec<f64> {
        (0..self.n_classifiers).map(|i| accuracy(self.row(i), &self.truth).unwrap_or(0.0)).collect()
    }

    pub fn contingency(&self, i: usize, j: usize) -> ContingencyFractions {
        contingency(self.row(i), self.row(j), &self.truth).expect("rows share the matrix width")
    }

    /// Keeps only the first `n` classifier rows.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.n_classifiers);
        let m = self.truth.len();
        Self {
            split: self.split,
            class_count: self.class_count,
            n_classifiers: n,
            truth: self.truth.clone(),
            preds: self.preds[..n * m].to_vec(),
        }
    }

    /// FNV-1a digest over shape, truth and predictions.
    pub fn checksum(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.n_classifiers as u64);
        eat(self.truth.len() as u64);
        for &t in self.truth.iter().chain(&self.preds) {
            eat(t as u64);
        }
        h
    }
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), actual: pred.len() });
    }
    if truth.is_empty() {
        return Err(Error::Empty("accuracy over zero instances"));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Joint hit/miss fractions of a classifier pair (c_i, c_j):
/// `a` both hit, `b` only c_j hits, `c` only c_i hits, `d` both miss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyFractions {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Number of instances the fractions were counted over.
    pub m: usize,
}

impl ContingencyFractions {
    pub fn from_counts(both: usize, only_j: usize, only_i: usize, neither: usize) -> Self {
        let m = both + only_j + only_i + neither;
        let mf = m.max(1) as f64;
        Self { a: both as f64 / mf, b: only_j as f64 / mf, c: only_i as f64 / mf, d: neither as f64 / mf, m }
    }

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d, m: 0 }
    }

    pub fn swapped(&self) -> Self {
        Self { b: self.c, c: self.b, ..*self }
    }
}

pub fn contingency(row_i: &[usize], row_j: &[usize], truth: &[usize]) -> Result<ContingencyFractions> {
    let m = truth.len();
    for len in [row_i.len(), row_j.len()] {
        if len != m {
            return Err(Error::LengthMismatch { expected: m, actual: len });
        }
    }
    if m == 0 {
        return Err(Error::Empty("contingency over zero instances"));
    }
    let mut counts = [0usize; 4];
    for ((pi, pj), t) in row_i.iter().zip(row_j).zip(truth) {
        let slot = match (pi == t, pj == t) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        counts[slot] += 1;
    }
    Ok(ContingencyFractions::from_counts(counts[0], counts[1], counts[2], counts[3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]), Ok(1.0));
        assert_eq!(accuracy(&[0, 0], &[1, 1]), Ok(0.0));
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]), Ok(0.75));
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn contingency_cases() {
        let truth = [0, 1, 2, 0];
        let c = contingency(&truth, &truth, &truth).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (1.0, 0.0, 0.0, 0.0));
        let c = contingency(&truth, &[1, 0, 0, 1], &truth).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (0.0, 0.0, 1.0, 0.0));

        // i correct on 1..=8, j correct on 3..=10
        let truth = vec![0usize; 10];
        let row_i: Vec<usize> = (1..=10).map(|k| usize::from(k > 8)).collect();
        let row_j: Vec<usize> = (1..=10).map(|k| usize::from(k < 3)).collect();
        let c = contingency(&row_i, &row_j, &truth).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (0.6, 0.2, 0.2, 0.0));
        assert_eq!(c.m, 10);
    }

    #[test]
    fn matrix_rejects_bad_rows() {
        assert!(LabelMatrix::new(SplitTag::Val1, 2, vec![0, 1], vec![vec![0]]).is_err());
        assert!(LabelMatrix::new(SplitTag::Val1, 2, vec![0, 1], vec![vec![0, 2]]).is_err());
    }
}
