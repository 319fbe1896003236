use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::argmax_count;
use crate::matrix::Matrix;

/// Euclidean k-nearest-neighbour vote over the stored training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    class_count: usize,
    train: Matrix,
    labels: Vec<usize>,
}

impl KnnModel {
    pub(super) fn fit(k: usize, train: Matrix, labels: &[usize], class_count: usize) -> Self {
        Self { k, class_count, train, labels: labels.to_vec() }
    }

    pub(super) fn predict_row(&self, x: &[f64]) -> usize {
        let k = self.k.min(self.labels.len());
        // (distance², index), ascending; earlier rows win distance ties
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for i in 0..self.train.rows() {
            let d2: f64 = self.train.row(i).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == k && d2 >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(d, _)| d <= d2);
            best.insert(pos, (d2, i));
            best.truncate(k);
        }
        let mut counts = alloc::vec![0usize; self.class_count];
        for &(_, i) in &best {
            counts[self.labels[i]] += 1;
        }
        argmax_count(&counts)
    }
}
