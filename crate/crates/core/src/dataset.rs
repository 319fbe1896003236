//! Labelled datasets, stratified fold partitions and bootstrap resamples.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::rng::{rng_for, stream};

/// Numeric features with densely encoded class labels in `0..class_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Validates and assembles a dataset. `class_names[c]` names label `c`.
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("dataset has no instances"));
        }
        if features.rows() != labels.len() {
            return Err(Error::LengthMismatch { expected: features.rows(), actual: labels.len() });
        }
        if let Some((row, col)) = features.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        let classes = class_names.len();
        let mut seen = alloc::vec![false; classes];
        for &l in &labels {
            if l >= classes {
                return Err(Error::LabelOutOfRange { label: l, classes });
            }
            seen[l] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::MissingClass(c));
        }
        Ok(Self { name: name.into(), features, labels, class_names })
    }

    /// Encodes raw label strings densely in first-appearance order.
    pub fn from_raw_labels<S: AsRef<str>>(
        name: impl Into<String>,
        features: Matrix,
        raw_labels: &[S],
    ) -> Result<Self> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut class_names = Vec::new();
        let mut labels = Vec::with_capacity(raw_labels.len());
        for raw in raw_labels {
            let raw = raw.as_ref();
            let next = index.len();
            let code = *index.entry(raw).or_insert_with(|| {
                class_names.push(String::from(raw));
                next
            });
            labels.push(code);
        }
        Self::new(name, features, labels, class_names)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.features.cols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.class_count()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Classes with fewer than `min` instances; these cannot appear in
    /// every one of `min` stratified partitions.
    pub fn sparse_classes(&self, min: usize) -> Vec<usize> {
        self.class_counts()
            .iter()
            .enumerate()
            .filter(|(_, &n)| n < min)
            .map(|(c, _)| c)
            .collect()
    }

    pub fn labels_at(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }
}

/// Index sets of one cross-validation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train_idx: Vec<usize>,
    pub val1_idx: Vec<usize>,
    pub val2_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

/// The k runs of a stratified k-way partition plus any stratification
/// warnings (classes absent from some partition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// `groups[g]` are the instance indices of partition g, ascending.
    pub groups: Vec<Vec<usize>>,
    pub splits: Vec<FoldSplit>,
    pub warnings: Vec<String>,
}

/// Partitions the dataset into `k` stratified groups and builds the k role
/// rotations: run r tests on group r, validates on groups r+1 (val1) and
/// r+2 (val2) mod k, and trains on the remaining k-3 groups.
///
/// Each class is shuffled and dealt round-robin, the deal position carrying
/// over between classes, so group sizes differ by at most one and every
/// class is spread as evenly as possible.
pub fn make_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 4 {
        return Err(invalid(format!("fold count must be at least 4, got {k}")));
    }
    if k > ds.len() {
        return Err(invalid(format!("fold count {k} exceeds {} instances", ds.len())));
    }
    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); ds.class_count()];
    for (i, &l) in ds.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    let mut groups: Vec<Vec<usize>> = alloc::vec![Vec::new(); k];
    let mut deal = 0usize;
    for (c, members) in by_class.iter_mut().enumerate() {
        let mut rng = rng_for(&[seed, stream::FOLDS, c as u64]);
        members.shuffle(&mut rng);
        for &i in members.iter() {
            groups[deal % k].push(i);
            deal += 1;
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }

    let mut warnings = Vec::new();
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            warnings.push(format!(
                "class {:?} has {} instances and is absent from {} of {k} partitions",
                ds.class_names()[c],
                members.len(),
                k - members.len()
            ));
        }
    }

    let splits = (0..k)
        .map(|r| {
            let mut train_idx = Vec::new();
            for off in 3..k {
                train_idx.extend_from_slice(&groups[(r + off) % k]);
            }
            train_idx.sort_unstable();
            FoldSplit {
                train_idx,
                val1_idx: groups[(r + 1) % k].clone(),
                val2_idx: groups[(r + 2) % k].clone(),
                test_idx: groups[r].clone(),
            }
        })
        .collect();
    Ok(FoldPlan { k, seed, groups, splits, warnings })
}

/// A with-replacement resample of a training index list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapSample {
    pub indices: Vec<usize>,
    pub rng_seed: u64,
}

pub fn bootstrap(train_idx: &[usize], seed: u64) -> Result<BootstrapSample> {
    if train_idx.is_empty() {
        return Err(Error::Empty("bootstrap needs a non-empty training set"));
    }
    let mut rng = rng_for(&[seed, stream::BOOTSTRAP]);
    let n = train_idx.len();
    let indices = (0..n).map(|_| train_idx[rng.gen_range(0..n)]).collect();
    Ok(BootstrapSample { indices, rng_seed: seed })
}

/// Per-column z-score parameters fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut mean = alloc::vec![0.0; d];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        let nf = n.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut var = alloc::vec![0.0; d];
        for i in 0..n {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        // constant columns keep unit scale
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = sqrt(s / nf);
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn identity(d: usize) -> Self {
        Self { mean: alloc::vec![0.0; d], scale: alloc::vec![1.0; d] }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.scale) {
            *o = (v - m) / s;
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            self.apply_row(x.row(i), out.row_mut(i));
        }
        out
    }
}
