use alloc::vec::Vec;

use libm::{exp, sqrt, tanh};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{argmax, MlpParams};
use crate::matrix::Matrix;
use crate::rng::rng_from_seed;

/// One tanh hidden layer with a softmax output, trained by mini-batch SGD
/// with momentum on cross-entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    /// hidden × inputs, row-major
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// outputs × hidden, row-major
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl MlpModel {
    fn forward(&self, x: &[f64], h: &mut [f64], out: &mut [f64]) {
        for (u, hu) in h.iter_mut().enumerate() {
            let w = &self.w1[u * self.inputs..(u + 1) * self.inputs];
            *hu = tanh(w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b1[u]);
        }
        for (o, ou) in out.iter_mut().enumerate() {
            let w = &self.w2[o * self.hidden..(o + 1) * self.hidden];
            *ou = w.iter().zip(h.iter()).map(|(a, b)| a * b).sum::<f64>() + self.b2[o];
        }
    }

    fn params_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    fn zero(&mut self) {
        for v in self.params_mut() {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// `v = momentum * v - step * grad; self += v`, parameter-wise.
    fn descend(&mut self, velocity: &mut MlpModel, grad: &MlpModel, momentum: f64, step: f64) {
        let grads = [&grad.w1, &grad.b1, &grad.w2, &grad.b2];
        for ((w, v), g) in self.params_mut().into_iter().zip(velocity.params_mut()).zip(grads) {
            for ((wi, vi), gi) in w.iter_mut().zip(v.iter_mut()).zip(g) {
                *vi = momentum * *vi - step * gi;
                *wi += *vi;
            }
        }
    }

    pub(super) fn predict_row(&self, x: &[f64]) -> usize {
        let mut h = alloc::vec![0.0; self.hidden];
        let mut out = alloc::vec![0.0; self.outputs];
        self.forward(x, &mut h, &mut out);
        argmax(&out)
    }
}

pub(super) fn fit(p: &MlpParams, x: &Matrix, labels: &[usize], class_count: usize, seed: u64) -> MlpModel {
    let (d, hdim, k) = (x.cols(), p.hidden, class_count);
    let mut rng = rng_from_seed(seed);
    let mut glorot = |fan_in: usize, fan_out: usize, len: usize| -> Vec<f64> {
        let limit = sqrt(6.0 / (fan_in + fan_out) as f64);
        (0..len).map(|_| rng.gen_range(-limit..limit)).collect()
    };
    let w1 = glorot(d, hdim, hdim * d);
    let w2 = glorot(hdim, k, k * hdim);
    let mut m = MlpModel { inputs: d, hidden: hdim, outputs: k, w1, b1: alloc::vec![0.0; hdim], w2, b2: alloc::vec![0.0; k] };

    let mut h = alloc::vec![0.0; hdim];
    let mut out = alloc::vec![0.0; k];
    let mut delta_h = alloc::vec![0.0; hdim];
    let mut grad = MlpModel {
        inputs: d,
        hidden: hdim,
        outputs: k,
        w1: alloc::vec![0.0; hdim * d],
        b1: alloc::vec![0.0; hdim],
        w2: alloc::vec![0.0; k * hdim],
        b2: alloc::vec![0.0; k],
    };
    let mut velocity = grad.clone();
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let batch = p.batch_size.clamp(1, x.rows().max(1));
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            grad.zero();
            for &i in chunk {
                let xi = x.row(i);
                m.forward(xi, &mut h, &mut out);
                // softmax gradient: p - onehot
                let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for o in out.iter_mut() {
                    *o = exp(*o - max);
                    z += *o;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o = *o / z - if c == labels[i] { 1.0 } else { 0.0 };
                }
                delta_h.iter_mut().for_each(|v| *v = 0.0);
                for (c, &g) in out.iter().enumerate() {
                    let w = &m.w2[c * hdim..(c + 1) * hdim];
                    let gw = &mut grad.w2[c * hdim..(c + 1) * hdim];
                    for (((wu, gu), hu), dh) in w.iter().zip(gw.iter_mut()).zip(&h).zip(delta_h.iter_mut()) {
                        *dh += wu * g;
                        *gu += g * hu;
                    }
                    grad.b2[c] += g;
                }
                for (u, (dh, hu)) in delta_h.iter().zip(&h).enumerate() {
                    let g = dh * (1.0 - hu * hu);
                    if g == 0.0 {
                        continue;
                    }
                    for (gv, xv) in grad.w1[u * d..(u + 1) * d].iter_mut().zip(xi) {
                        *gv += g * xv;
                    }
                    grad.b1[u] += g;
                }
            }
            let step = p.learning_rate / chunk.len() as f64;
            m.descend(&mut velocity, &grad, p.momentum, step);
        }
    }
    m
}
