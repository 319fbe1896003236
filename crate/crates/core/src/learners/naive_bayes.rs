use alloc::vec::Vec;

use libm::log;
use serde::{Deserialize, Serialize};

use super::{argmax, NbParams};
use crate::matrix::Matrix;

/// Per-class, per-feature independent Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    /// `None` for classes absent from the training data.
    log_prior: Vec<Option<f64>>,
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNbModel {
    pub(super) fn predict_row(&self, x: &[f64]) -> usize {
        let scores: Vec<f64> = self
            .log_prior
            .iter()
            .enumerate()
            .map(|(c, prior)| match prior {
                None => f64::NEG_INFINITY,
                Some(lp) => {
                    let ll: f64 = x
                        .iter()
                        .zip(&self.mean[c])
                        .zip(&self.var[c])
                        .map(|((v, m), s2)| -0.5 * log(2.0 * core::f64::consts::PI * s2) - (v - m) * (v - m) / (2.0 * s2))
                        .sum();
                    lp + ll
                }
            })
            .collect();
        argmax(&scores)
    }
}

pub(super) fn fit(p: &NbParams, x: &Matrix, labels: &[usize], class_count: usize) -> GaussianNbModel {
    let d = x.cols();
    let mut count = alloc::vec![0usize; class_count];
    let mut mean = alloc::vec![alloc::vec![0.0; d]; class_count];
    let mut var = alloc::vec![alloc::vec![0.0; d]; class_count];
    for (i, &l) in labels.iter().enumerate() {
        count[l] += 1;
        for (m, v) in mean[l].iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for c in 0..class_count {
        if count[c] > 0 {
            let n = count[c] as f64;
            mean[c].iter_mut().for_each(|m| *m /= n);
        }
    }
    for (i, &l) in labels.iter().enumerate() {
        for ((s, v), m) in var[l].iter_mut().zip(x.row(i)).zip(&mean[l]) {
            *s += (v - m) * (v - m);
        }
    }
    for c in 0..class_count {
        let n = count[c].max(1) as f64;
        var[c].iter_mut().for_each(|s| *s = (*s / n).max(p.var_floor));
    }
    let total = labels.len() as f64;
    let log_prior = count.iter().map(|&n| (n > 0).then(|| log(n as f64 / total))).collect();
    GaussianNbModel { log_prior, mean, var }
}
