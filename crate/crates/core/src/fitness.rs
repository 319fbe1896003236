//! The three minimized fitness functions over ensemble masks.

use serde::{Deserialize, Serialize};

use crate::diversity::{ensemble_diversity_of, DiversityNormalization, PairDiversityTable};
use crate::error::{invalid, Result};
use crate::mask::EnsembleMask;
use crate::predictions::{LabelMatrix, SplitTag};
use crate::vote::ensemble_accuracy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitnessKind {
    /// Error rate only.
    E,
    /// Mean of error rate and ensemble diversity score.
    D,
    /// Weighted error, diversity and ensemble size.
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessSpec {
    pub kind: FitnessKind,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eval_split: SplitTag,
    pub normalization: DiversityNormalization,
}

impl FitnessSpec {
    /// Defaults: α = β = 0.45, γ = 0.1, evaluated on validation-2.
    pub fn new(kind: FitnessKind) -> Self {
        Self {
            kind,
            alpha: 0.45,
            beta: 0.45,
            gamma: 0.1,
            eval_split: SplitTag::Val2,
            normalization: DiversityNormalization::PairCount,
        }
    }

    /// Sets γ and splits the remainder evenly between α and β.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self.alpha = (1.0 - gamma) / 2.0;
        self.beta = (1.0 - gamma) / 2.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let w = [self.alpha, self.beta, self.gamma];
        if w.iter().any(|v| !(0.0..=1.0).contains(v)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(invalid(alloc::format!(
                "fitness weights ({}, {}, {}) must lie in [0, 1] and sum to 1",
                self.alpha, self.beta, self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessValue {
    pub value: f64,
    /// Ensemble error rate.
    pub e_m: f64,
    /// Mean pair diversity score (D and P only).
    pub d_m: Option<f64>,
    /// Fraction of the pool that is active (P only).
    pub t_p: Option<f64>,
}

/// Error rate of the active members' majority vote.
pub fn error_rate(mask: &EnsembleMask, matrix: &LabelMatrix) -> f64 {
    1.0 - ensemble_accuracy(&mask.active(), matrix)
}

pub fn f_e(mask: &EnsembleMask, matrix: &LabelMatrix) -> FitnessValue {
    let e_m = error_rate(mask, matrix);
    FitnessValue { value: e_m, e_m, d_m: None, t_p: None }
}

pub fn f_d(mask: &EnsembleMask, matrix: &LabelMatrix, table: &PairDiversityTable) -> FitnessValue {
    f_d_with(mask, matrix, table, DiversityNormalization::PairCount)
}

fn f_d_with(
    mask: &EnsembleMask,
    matrix: &LabelMatrix,
    table: &PairDiversityTable,
    norm: DiversityNormalization,
) -> FitnessValue {
    let active = mask.active();
    let e_m = 1.0 - ensemble_accuracy(&active, matrix);
    let d_m = ensemble_diversity_of(&active, table, norm);
    FitnessValue { value: (e_m + d_m) / 2.0, e_m, d_m: Some(d_m), t_p: None }
}

pub fn f_p(mask: &EnsembleMask, matrix: &LabelMatrix, table: &PairDiversityTable, spec: &FitnessSpec) -> Result<FitnessValue> {
    spec.validate()?;
    let active = mask.active();
    let e_m = 1.0 - ensemble_accuracy(&active, matrix);
    let d_m = ensemble_diversity_of(&active, table, spec.normalization);
    let t_p = active.len() as f64 / mask.len() as f64;
    Ok(FitnessValue { value: recombine_p(spec, e_m, d_m, t_p), e_m, d_m: Some(d_m), t_p: Some(t_p) })
}

/// α·e_m + β·d_m + γ·t_p
pub fn recombine_p(spec: &FitnessSpec, e_m: f64, d_m: f64, t_p: f64) -> f64 {
    spec.alpha * e_m + spec.beta * d_m + spec.gamma * t_p
}

/// A fitness function bound to its label matrix and pair table.
#[derive(Debug, Clone, Copy)]
pub struct FitnessFunction<'a> {
    pub spec: FitnessSpec,
    pub matrix: &'a LabelMatrix,
    pub table: &'a PairDiversityTable,
}

impl<'a> FitnessFunction<'a> {
    pub fn new(spec: FitnessSpec, matrix: &'a LabelMatrix, table: &'a PairDiversityTable) -> Result<Self> {
        spec.validate()?;
        if matrix.n_classifiers() != table.pool_size() {
            return Err(invalid("label matrix and pair table describe different pools"));
        }
        Ok(Self { spec, matrix, table })
    }

    pub fn evaluate(&self, mask: &EnsembleMask) -> FitnessValue {
        match self.spec.kind {
            FitnessKind::E => f_e(mask, self.matrix),
            FitnessKind::D => f_d_with(mask, self.matrix, self.table, self.spec.normalization),
            FitnessKind::P => f_p(mask, self.matrix, self.table, &self.spec).expect("weights validated at construction"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::{PairDiversityTable, PairRecord};
    use crate::predictions::ContingencyFractions;
    use alloc::vec;
    use alloc::vec::Vec;

    fn matrix() -> LabelMatrix {
        // majority of the three rows is [0,1,1,0] against truth [0,1,0,0]
        let rows = vec![vec![0, 1, 1, 0], vec![0, 1, 1, 1], vec![1, 0, 1, 0]];
        LabelMatrix::new(SplitTag::Val2, 2, vec![0, 1, 0, 0], rows).unwrap()
    }

    fn flat_table(n: usize, v: f64) -> PairDiversityTable {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut r = PairRecord::from_contingency(i, j, ContingencyFractions::new(1.0, 0.0, 0.0, 0.0)).unwrap();
                r.combined = v;
                pairs.push(r);
            }
        }
        PairDiversityTable::from_pairs(n, pairs)
    }

    #[test]
    fn error_fitness() {
        assert_eq!(f_e(&EnsembleMask::full(3), &matrix()).value, 0.25);
        let perfect = LabelMatrix::new(SplitTag::Val2, 2, vec![0, 1], vec![vec![0, 1]]).unwrap();
        assert_eq!(f_e(&EnsembleMask::full(1), &perfect).value, 0.0);
    }

    #[test]
    fn diversity_fitness() {
        let t = flat_table(3, 0.4);
        let v = f_d(&EnsembleMask::full(3), &matrix(), &t);
        assert!((v.value - (0.25 + 0.4) / 2.0).abs() < 1e-15);
        let single = f_d(&EnsembleMask::from_indices(3, &[0]), &matrix(), &t);
        assert_eq!(single.d_m, Some(1.0));
        assert_eq!(single.value, (single.e_m + 1.0) / 2.0);
    }

    #[test]
    fn pruning_fitness_and_weights() {
        let spec = FitnessSpec::new(FitnessKind::P);
        assert!((recombine_p(&spec, 0.2, 0.4, 0.1) - 0.28).abs() < 1e-15);
        let t = flat_table(3, 0.4);
        let v = f_p(&EnsembleMask::full(3), &matrix(), &t, &spec).unwrap();
        assert_eq!(v.t_p, Some(1.0));
        assert_eq!(v.value, recombine_p(&spec, v.e_m, v.d_m.unwrap(), v.t_p.unwrap()));
        let bad = FitnessSpec { gamma: 0.5, ..spec };
        assert!(f_p(&EnsembleMask::full(3), &matrix(), &t, &bad).is_err());
        assert!(FitnessSpec::new(FitnessKind::P).with_gamma(0.3).validate().is_ok());
    }

    #[test]
    fn pruning_factor_ratio() {
        let mask = EnsembleMask::from_indices(150, &(0..15).collect::<Vec<_>>());
        assert_eq!(mask.count_ones() as f64 / mask.len() as f64, 0.1);
    }
}
