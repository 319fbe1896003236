//! Hard-label majority voting and final ensemble scoring.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::EnsembleMask;
use crate::predictions::{accuracy, LabelMatrix};

/// Most frequent label among `votes`; ties go to the lowest label.
pub fn majority_vote(votes: &[usize]) -> Result<usize> {
    let max = *votes.iter().max().ok_or(Error::Empty("majority vote over zero votes"))?;
    let mut counts = alloc::vec![0usize; max + 1];
    for &v in votes {
        counts[v] += 1;
    }
    Ok(crate::learners::argmax_count(&counts))
}

/// Per-instance majority labels of the listed rows of `matrix`.
pub fn ensemble_predictions(active: &[usize], matrix: &LabelMatrix) -> Vec<usize> {
    let (m, l) = (matrix.n_instances(), matrix.class_count());
    let mut counts = alloc::vec![0u32; m * l];
    for &i in active {
        for (inst, &label) in matrix.row(i).iter().enumerate() {
            counts[inst * l + label] += 1;
        }
    }
    counts
        .chunks(l)
        .map(|c| {
            let mut best = 0;
            for k in 1..l {
                if c[k] > c[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Fraction of instances the active members' majority gets right.
pub fn ensemble_accuracy(active: &[usize], matrix: &LabelMatrix) -> f64 {
    let pred = ensemble_predictions(active, matrix);
    accuracy(&pred, matrix.truth()).unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub mask: EnsembleMask,
    pub test_accuracy: f64,
    pub ensemble_size: usize,
    /// Majority label per test instance.
    pub per_instance_votes: Option<Vec<usize>>,
}

/// Scores the ensemble selected by `mask` on `matrix` (normally the test split).
pub fn evaluate(mask: &EnsembleMask, matrix: &LabelMatrix) -> Result<EnsembleResult> {
    if mask.len() != matrix.n_classifiers() {
        return Err(Error::LengthMismatch { expected: matrix.n_classifiers(), actual: mask.len() });
    }
    let active = mask.active();
    if active.is_empty() {
        return Err(Error::Empty("ensemble mask has no active classifier"));
    }
    let pred = ensemble_predictions(&active, matrix);
    let test_accuracy = accuracy(&pred, matrix.truth())?;
    Ok(EnsembleResult { mask: mask.clone(), test_accuracy, ensemble_size: active.len(), per_instance_votes: Some(pred) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictions::SplitTag;
    use alloc::vec;

    #[test]
    fn vote_cases() {
        assert_eq!(majority_vote(&[0, 0, 1]), Ok(0));
        assert_eq!(majority_vote(&[2, 2, 2]), Ok(2));
        assert_eq!(majority_vote(&[0, 1]), Ok(0));
        assert_eq!(majority_vote(&[3, 1, 3, 1]), Ok(1));
        assert!(majority_vote(&[]).is_err());
    }

    #[test]
    fn evaluate_hand_example() {
        let rows = vec![vec![0, 1, 0, 0], vec![0, 1, 1, 0], vec![1, 1, 1, 0]];
        let lm = LabelMatrix::new(SplitTag::Test, 2, vec![0, 1, 1, 0], rows).unwrap();
        let r = evaluate(&EnsembleMask::full(3), &lm).unwrap();
        assert_eq!(r.per_instance_votes, Some(vec![0, 1, 1, 0]));
        assert_eq!(r.test_accuracy, 1.0);
        assert_eq!(r.ensemble_size, 3);

        let single = evaluate(&EnsembleMask::from_indices(3, &[0]), &lm).unwrap();
        assert_eq!(single.test_accuracy, 0.75);
        assert!(evaluate(&EnsembleMask::empty(3), &lm).is_err());
    }

    #[test]
    fn identical_members_match_one_member() {
        let row = vec![0, 2, 1, 1, 0];
        let lm = LabelMatrix::new(SplitTag::Test, 3, vec![0, 2, 2, 1, 1], vec![row.clone(), row.clone(), row]).unwrap();
        let all = evaluate(&EnsembleMask::full(3), &lm).unwrap();
        assert_eq!(all.test_accuracy, 0.6);
    }
}
