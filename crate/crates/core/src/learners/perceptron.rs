use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{argmax, PerceptronParams};
use crate::matrix::Matrix;
use crate::rng::rng_from_seed;

/// Linear scorer. Two classes use one weight vector (class 1 iff the score
/// is positive); more classes use one-vs-rest vectors and take the argmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl LinearModel {
    pub fn binary(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights: alloc::vec![weights], bias: alloc::vec![bias] }
    }

    pub fn one_vs_rest(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Self {
        Self { weights, bias }
    }

    fn score(&self, k: usize, x: &[f64]) -> f64 {
        self.weights[k].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias[k]
    }

    pub(super) fn predict_row(&self, x: &[f64]) -> usize {
        if self.weights.len() == 1 {
            usize::from(self.score(0, x) > 0.0)
        } else {
            let scores: Vec<f64> = (0..self.weights.len()).map(|k| self.score(k, x)).collect();
            argmax(&scores)
        }
    }
}

pub(super) fn fit(p: &PerceptronParams, x: &Matrix, labels: &[usize], class_count: usize, seed: u64) -> LinearModel {
    let heads = if class_count == 2 { 1 } else { class_count };
    let d = x.cols();
    let mut weights = alloc::vec![alloc::vec![0.0; d]; heads];
    let mut bias = alloc::vec![0.0; heads];
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let positive = |i: usize, head: usize| if heads == 1 { labels[i] == 1 } else { labels[i] == head };

    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &i in &order {
            let row = x.row(i);
            for head in 0..heads {
                let target = if positive(i, head) { 1.0 } else { -1.0 };
                let s: f64 = weights[head].iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias[head];
                let predicted = if s > 0.0 { 1.0 } else { -1.0 };
                if predicted != target {
                    mistakes += 1;
                    for (w, v) in weights[head].iter_mut().zip(row) {
                        *w += p.learning_rate * target * v;
                    }
                    bias[head] += p.learning_rate * target;
                }
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    LinearModel { weights, bias }
}
