//! Base classifiers and bootstrapped pool generation.

mod knn;
mod mlp;
mod naive_bayes;
mod perceptron;
mod pool;
mod tree;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Standardizer;
use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

pub use knn::KnnModel;
pub use mlp::MlpModel;
pub use naive_bayes::GaussianNbModel;
pub use perceptron::LinearModel;
pub use pool::{build_pool, technique_for, ClassifierMode, ClassifierPool, PoolConfig, PoolMember, PoolPredictions};
pub use tree::TreeModel;

/// Neighbourhood sizes used by the multi-technique pool.
pub const KNN_KS: [usize; 7] = [1, 3, 5, 7, 9, 13, 21];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptronParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for PerceptronParams {
    fn default() -> Self {
        Self { learning_rate: 1.0, epochs: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    k: usize,
}

impl KnnParams {
    pub fn new(k: usize) -> Result<Self> {
        if KNN_KS.contains(&k) {
            Ok(Self { k })
        } else {
            Err(invalid(format!("k = {k} is not one of {KNN_KS:?}")))
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 10, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub var_floor: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Mini-batch size, capped at the training set size.
    pub batch_size: usize,
    pub momentum: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { hidden: 100, learning_rate: 0.01, epochs: 200, batch_size: 200, momentum: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Technique {
    Perceptron(PerceptronParams),
    Knn(KnnParams),
    DecisionTree(TreeParams),
    GaussianNb(NbParams),
    Mlp(MlpParams),
}

impl Technique {
    pub fn perceptron() -> Self {
        Technique::Perceptron(PerceptronParams::default())
    }

    pub fn knn(k: usize) -> Result<Self> {
        KnnParams::new(k).map(Technique::Knn)
    }

    /// The eleven techniques of the multi-technique pool, in cycling order.
    pub fn multi() -> Vec<Technique> {
        let mut all: Vec<Technique> = KNN_KS.iter().map(|&k| Technique::Knn(KnnParams { k })).collect();
        all.push(Technique::DecisionTree(TreeParams::default()));
        all.push(Technique::GaussianNb(NbParams::default()));
        all.push(Technique::Mlp(MlpParams::default()));
        all.push(Technique::perceptron());
        all
    }

    pub fn name(&self) -> alloc::string::String {
        match self {
            Technique::Perceptron(_) => "Perceptron".into(),
            Technique::Knn(p) => format!("KNN{}", p.k),
            Technique::DecisionTree(_) => "DecisionTree".into(),
            Technique::GaussianNb(_) => "GaussianNB".into(),
            Technique::Mlp(_) => "MLP".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    /// Predicts one label everywhere (single-class training data).
    Constant(usize),
    Linear(LinearModel),
    Knn(KnnModel),
    Tree(TreeModel),
    GaussianNb(GaussianNbModel),
    Mlp(MlpModel),
}

impl Model {
    fn predict_row(&self, x: &[f64]) -> usize {
        match self {
            Model::Constant(l) => *l,
            Model::Linear(m) => m.predict_row(x),
            Model::Knn(m) => m.predict_row(x),
            Model::Tree(m) => m.predict_row(x),
            Model::GaussianNb(m) => m.predict_row(x),
            Model::Mlp(m) => m.predict_row(x),
        }
    }
}

/// A fitted base classifier. Inputs are standardized with the stored
/// training statistics before reaching the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub technique: Technique,
    pub standardizer: Standardizer,
    pub model: Model,
    pub train_seed: u64,
    pub class_count: usize,
}

impl TrainedClassifier {
    pub fn from_parts(technique: Technique, standardizer: Standardizer, model: Model, class_count: usize) -> Self {
        Self { technique, standardizer, model, train_seed: 0, class_count }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let d = self.standardizer.width();
        if x.cols() != d {
            return Err(Error::WidthMismatch { expected: d, actual: x.cols() });
        }
        let mut buf = alloc::vec![0.0; d];
        Ok((0..x.rows())
            .map(|i| {
                self.standardizer.apply_row(x.row(i), &mut buf);
                self.model.predict_row(&buf)
            })
            .collect())
    }
}

/// Fits `technique` on `(x, labels)`; labels must lie in `0..class_count`.
pub fn train(technique: &Technique, x: &Matrix, labels: &[usize], class_count: usize, seed: u64) -> Result<TrainedClassifier> {
    if x.rows() == 0 {
        return Err(Error::Empty("training set has no instances"));
    }
    if x.rows() != labels.len() {
        return Err(Error::LengthMismatch { expected: x.rows(), actual: labels.len() });
    }
    if let Some((row, col)) = x.first_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
        return Err(Error::LabelOutOfRange { label, classes: class_count });
    }
    let standardizer = Standardizer::fit(x);
    let model = if labels.iter().all(|&l| l == labels[0]) {
        Model::Constant(labels[0])
    } else {
        let z = standardizer.transform(x);
        match technique {
            Technique::Perceptron(p) => Model::Linear(perceptron::fit(p, &z, labels, class_count, seed)),
            Technique::Knn(p) => Model::Knn(KnnModel::fit(p.k, z, labels, class_count)),
            Technique::DecisionTree(p) => Model::Tree(tree::fit(p, &z, labels, class_count)),
            Technique::GaussianNb(p) => Model::GaussianNb(naive_bayes::fit(p, &z, labels, class_count)),
            Technique::Mlp(p) => Model::Mlp(mlp::fit(p, &z, labels, class_count, seed)),
        }
    };
    Ok(TrainedClassifier { technique: *technique, standardizer, model, train_seed: seed, class_count })
}

/// Index of the largest score; the lowest index wins ties.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Most frequent label; the lowest label wins ties.
pub(crate) fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn multi_has_eleven_techniques() {
        let all = Technique::multi();
        assert_eq!(all.len(), 11);
        assert_eq!(all[0].name(), "KNN1");
        assert_eq!(all[10].name(), "Perceptron");
    }

    #[test]
    fn knn_k_is_restricted() {
        assert!(Technique::knn(13).is_ok());
        assert!(Technique::knn(4).is_err());
    }

    #[test]
    fn single_class_gives_constant() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 1.0], [0.0, 0.0]]).unwrap();
        for t in Technique::multi() {
            let c = train(&t, &x, &[2, 2, 2], 3, 1).unwrap();
            let q = Matrix::from_rows(&[[9.0, 9.0]; 5]).unwrap();
            assert_eq!(c.predict(&q).unwrap(), vec![2; 5]);
        }
    }

    #[test]
    fn training_errors() {
        let t = Technique::perceptron();
        assert!(train(&t, &Matrix::zeros(0, 2), &[], 2, 0).is_err());
        let x = Matrix::from_rows(&[[f64::INFINITY]]).unwrap();
        assert!(matches!(train(&t, &x, &[0], 1, 0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn width_mismatch_on_predict() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let c = train(&Technique::knn(1).unwrap(), &x, &[0, 1], 2, 0).unwrap();
        let q = Matrix::from_rows(&[[0.0]]).unwrap();
        assert_eq!(c.predict(&q), Err(Error::WidthMismatch { expected: 2, actual: 1 }));
    }

    #[test]
    fn hand_built_perceptron() {
        let model = Model::Linear(LinearModel::binary(vec![1.0, 0.0], 0.0));
        let c = TrainedClassifier::from_parts(Technique::perceptron(), Standardizer::identity(2), model, 2);
        let q = Matrix::from_rows(&[[2.0, 7.0], [-2.0, 7.0]]).unwrap();
        assert_eq!(c.predict(&q).unwrap(), vec![1, 0]);
    }

    #[test]
    fn every_technique_learns_separable_data() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let t = i as f64 / 10.0;
            rows.push([t, 1.0 + (i % 3) as f64]);
            labels.push(0);
            rows.push([t + 10.0, -1.0 - (i % 3) as f64]);
            labels.push(1);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        for t in Technique::multi() {
            let c = train(&t, &x, &labels, 2, 3).unwrap();
            let acc = crate::predictions::accuracy(&c.predict(&x).unwrap(), &labels).unwrap();
            assert!(acc >= 0.95, "{} reached only {acc}", t.name());
        }
    }
}
