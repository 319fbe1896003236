use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{argmax_count, TreeParams};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART classification tree grown on Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<Node>,
}

impl TreeModel {
    pub(super) fn predict_row(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(l) => return l,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / nf) * (c as f64 / nf)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a Matrix,
    labels: &'a [usize],
    classes: usize,
    params: TreeParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let mut counts = alloc::vec![0usize; self.classes];
        for &i in idx.iter() {
            counts[self.labels[i]] += 1;
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(argmax_count(&counts)));
        let n = idx.len();
        let pure = counts.iter().any(|&c| c == n);
        if pure || depth >= self.params.max_depth || n < 2 * self.params.min_leaf {
            return at;
        }
        let parent = gini(&counts, n);
        let Some(best) = self.best_split(idx, &counts) else {
            return at;
        };
        if best.impurity >= parent - 1e-12 {
            return at;
        }
        let (feature, threshold) = (best.feature, best.threshold);
        let mut left: Vec<usize> = idx.iter().copied().filter(|&i| self.x.row(i)[feature] <= threshold).collect();
        let mut right: Vec<usize> = idx.iter().copied().filter(|&i| self.x.row(i)[feature] > threshold).collect();
        let l = self.grow(&mut left, depth + 1);
        let r = self.grow(&mut right, depth + 1);
        self.nodes[at] = Node::Split { feature, threshold, left: l, right: r };
        at
    }

    fn best_split(&self, idx: &mut [usize], counts: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<BestSplit> = None;
        let mut left = alloc::vec![0usize; self.classes];
        let mut right = alloc::vec![0usize; self.classes];
        for f in 0..self.x.cols() {
            idx.sort_by(|&a, &b| self.x.row(a)[f].total_cmp(&self.x.row(b)[f]).then(a.cmp(&b)));
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(counts);
            for k in 0..n - 1 {
                let l = self.labels[idx[k]];
                left[l] += 1;
                right[l] -= 1;
                let (v, next) = (self.x.row(idx[k])[f], self.x.row(idx[k + 1])[f]);
                let nl = k + 1;
                if v == next || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let impurity = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
                if best.as_ref().map_or(true, |b| impurity < b.impurity) {
                    best = Some(BestSplit { impurity, feature: f, threshold: 0.5 * (v + next) });
                }
            }
        }
        best
    }
}

pub(super) fn fit(p: &TreeParams, x: &Matrix, labels: &[usize], class_count: usize) -> TreeModel {
    let mut b = Builder { x, labels, classes: class_count, params: *p, nodes: Vec::new() };
    let mut idx: Vec<usize> = (0..x.rows()).collect();
    b.grow(&mut idx, 0);
    TreeModel { nodes: b.nodes }
}
