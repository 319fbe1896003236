//! Pairwise diversity measures over hit/miss contingency fractions.
//!
//! Raw scores follow the usual definitions. Oriented scores live in [0, 1]
//! with *lower meaning more diverse*, so that all five can be averaged,
//! multiplied and ranked together.

use alloc::vec::Vec;

use libm::sqrt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::mask::EnsembleMask;
use crate::predictions::{ContingencyFractions, LabelMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    /// Correlation coefficient.
    Cor,
    /// Double-fault measure.
    Dfm,
    /// Disagreement measure.
    Dm,
    /// Interrater agreement.
    Ia,
    /// Yule's Q statistic.
    Qstat,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] =
        [MeasureKind::Cor, MeasureKind::Dfm, MeasureKind::Dm, MeasureKind::Ia, MeasureKind::Qstat];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Cor => "COR",
            MeasureKind::Dfm => "DFM",
            MeasureKind::Dm => "DM",
            MeasureKind::Ia => "IA",
            MeasureKind::Qstat => "QSTAT",
        }
    }

    /// Closed range the raw score can take.
    ///
    /// The interrater agreement numerator `2(ac - bd)` reaches ±2 at the
    /// corners of the simplex (e.g. `b = d = 0`), unlike the other signed
    /// measures which stay in [-1, 1].
    pub fn raw_range(self) -> (f64, f64) {
        match self {
            MeasureKind::Cor | MeasureKind::Qstat => (-1.0, 1.0),
            MeasureKind::Ia => (-2.0, 2.0),
            MeasureKind::Dfm | MeasureKind::Dm => (0.0, 1.0),
        }
    }
}

/// Raw score of one measure. Zero denominators yield 0.
pub fn measure(kind: MeasureKind, ct: &ContingencyFractions) -> f64 {
    let ContingencyFractions { a, b, c, d, .. } = *ct;
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    match kind {
        MeasureKind::Cor => ratio(a * d - b * c, sqrt((a + b) * (c + d) * (a + c) * (b + d))),
        MeasureKind::Dfm => d,
        MeasureKind::Dm => ratio(b + c, a + b + c + d),
        MeasureKind::Ia => ratio(2.0 * (a * c - b * d), (a + b) * (c + d) + (a + c) * (b + d)),
        MeasureKind::Qstat => ratio(a * d - b * c, a * d + b * c),
    }
}

/// Maps a raw score into [0, 1] so that lower means more diverse.
///
/// COR, IA and QSTAT use `(x + 1) / 2` (IA saturates outside [-1, 1]),
/// DFM is already oriented, DM becomes `1 - x`.
pub fn orient_normalize(kind: MeasureKind, raw: f64) -> Result<f64> {
    let (lo, hi) = kind.raw_range();
    if !(raw >= lo - 1e-9 && raw <= hi + 1e-9) {
        return Err(Error::OutOfRange { kind: kind.name(), value: raw });
    }
    let v = match kind {
        MeasureKind::Cor | MeasureKind::Ia | MeasureKind::Qstat => (raw + 1.0) / 2.0,
        MeasureKind::Dfm => raw,
        MeasureKind::Dm => 1.0 - raw,
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Mean of the five oriented scores of a pair.
pub fn pair_combined(oriented: &[f64; 5]) -> f64 {
    oriented.iter().sum::<f64>() / 5.0
}

/// Product aggregation of the oriented scores, `prod(1 + s)`, in [1, 32].
pub fn aggregate_scores(oriented: &[f64; 5]) -> f64 {
    oriented.iter().map(|s| 1.0 + s).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub ct: ContingencyFractions,
    /// Raw scores in [`MeasureKind::ALL`] order.
    pub raw: [f64; 5],
    pub oriented: [f64; 5],
    /// Mean oriented score, `d_c`.
    pub combined: f64,
}

impl PairRecord {
    pub fn from_contingency(i: usize, j: usize, ct: ContingencyFractions) -> Result<Self> {
        let mut raw = [0.0; 5];
        let mut oriented = [0.0; 5];
        for (k, kind) in MeasureKind::ALL.into_iter().enumerate() {
            raw[k] = measure(kind, &ct);
            oriented[k] = orient_normalize(kind, raw[k])?;
        }
        Ok(Self { i, j, ct, raw, oriented, combined: pair_combined(&oriented) })
    }
}

/// How the sum of pair scores of an ensemble is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DiversityNormalization {
    /// Divide by the number of active pairs, `k(k-1)/2`; stays in [0, 1].
    #[default]
    PairCount,
    /// Divide by the number of active classifiers `k`; can exceed 1.
    ActiveCount,
}

/// All unordered pairs of a pool with their diversity scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDiversityTable {
    n: usize,
    pairs: Vec<PairRecord>,
    combined: Vec<f64>,
}

impl PairDiversityTable {
    pub fn build<E: Executor>(matrix: &LabelMatrix, exec: &E) -> Self {
        let n = matrix.n_classifiers();
        let rows: Vec<usize> = (0..n).collect();
        let per_row: Vec<Vec<PairRecord>> = exec.map(&rows, |&i| {
            (i + 1..n)
                .map(|j| {
                    PairRecord::from_contingency(i, j, matrix.contingency(i, j))
                        .expect("fractions of a label matrix are valid")
                })
                .collect()
        });
        Self::from_pairs(n, per_row.into_iter().flatten().collect())
    }

    /// Assembles a table from records covering every pair `i < j` of `n`.
    pub fn from_pairs(n: usize, mut pairs: Vec<PairRecord>) -> Self {
        pairs.sort_by_key(|p| (p.i, p.j));
        let mut combined = alloc::vec![0.0; n * n];
        for p in &pairs {
            combined[p.i * n + p.j] = p.combined;
            combined[p.j * n + p.i] = p.combined;
        }
        Self { n, pairs, combined }
    }

    pub fn pool_size(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[PairRecord] {
        &self.pairs
    }

    #[inline]
    pub fn combined(&self, i: usize, j: usize) -> f64 {
        self.combined[i * self.n + j]
    }
}

/// Mean pair diversity `d_m` of the active members of `mask`. Masks with
/// fewer than two members score 1.0, the least diverse value.
pub fn ensemble_diversity(mask: &EnsembleMask, table: &PairDiversityTable, norm: DiversityNormalization) -> f64 {
    let active = mask.active();
    ensemble_diversity_of(&active, table, norm)
}

pub fn ensemble_diversity_of(active: &[usize], table: &PairDiversityTable, norm: DiversityNormalization) -> f64 {
    let k = active.len();
    if k < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for (x, &i) in active.iter().enumerate() {
        let row = &table.combined[i * table.n..(i + 1) * table.n];
        for &j in &active[x + 1..] {
            sum += row[j];
        }
    }
    let denom = match norm {
        DiversityNormalization::PairCount => (k * (k - 1) / 2) as f64,
        DiversityNormalization::ActiveCount => k as f64,
    };
    sum / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::predictions::SplitTag;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn running_example_raw_scores() {
        let ct = ContingencyFractions::new(0.5, 0.2, 0.2, 0.1);
        assert!(close(measure(MeasureKind::Dm, &ct), 0.4, 1e-12));
        assert!(close(measure(MeasureKind::Dfm, &ct), 0.1, 1e-12));
        assert!(close(measure(MeasureKind::Qstat, &ct), 0.01 / 0.09, 1e-12));
        assert!(close(measure(MeasureKind::Cor, &ct), 0.01 / 0.21, 1e-12));
        assert!(close(measure(MeasureKind::Ia, &ct), 0.16 / 0.42, 1e-12));
    }

    #[test]
    fn zero_numerators_and_identical_pairs() {
        let ct = ContingencyFractions::new(0.4, 0.2, 0.2, 0.1);
        assert!(close(measure(MeasureKind::Qstat, &ct), 0.0, 1e-15));
        assert!(close(measure(MeasureKind::Cor, &ct), 0.0, 1e-15));
        let same = ContingencyFractions::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(measure(MeasureKind::Dm, &same), 0.0);
        assert_eq!(measure(MeasureKind::Dfm, &same), 0.0);
        // degenerate denominators fall back to 0
        assert_eq!(measure(MeasureKind::Cor, &same), 0.0);
        assert_eq!(measure(MeasureKind::Qstat, &same), 0.0);
        assert_eq!(measure(MeasureKind::Ia, &same), 0.0);
    }

    #[test]
    fn orientation() {
        assert!(close(orient_normalize(MeasureKind::Dm, 0.4).unwrap(), 0.6, 1e-15));
        assert_eq!(orient_normalize(MeasureKind::Qstat, -1.0).unwrap(), 0.0);
        assert!(close(orient_normalize(MeasureKind::Cor, 0.04762).unwrap(), 0.52381, 1e-12));
        assert_eq!(orient_normalize(MeasureKind::Ia, 1.7).unwrap(), 1.0);
        assert!(orient_normalize(MeasureKind::Dm, 1.1).is_err());
        assert!(orient_normalize(MeasureKind::Cor, -1.0 - 1e-6).is_err());
        assert!(orient_normalize(MeasureKind::Dfm, f64::NAN).is_err());
    }

    #[test]
    fn combined_and_aggregate() {
        assert_eq!(pair_combined(&[0.0; 5]), 0.0);
        assert_eq!(pair_combined(&[1.0; 5]), 1.0);
        assert!(close(pair_combined(&[0.6, 0.1, 0.52381, 0.69048, 0.55556]), 0.49397, 1e-9));
        assert_eq!(aggregate_scores(&[0.0; 5]), 1.0);
        assert_eq!(aggregate_scores(&[1.0; 5]), 32.0);
        assert!(close(aggregate_scores(&[0.1, 0.2, 0.0, 0.0, 0.0]), 1.32, 1e-12));
    }

    fn table_with(n: usize, score: impl Fn(usize, usize) -> f64) -> PairDiversityTable {
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut rec = PairRecord::from_contingency(i, j, ContingencyFractions::new(1.0, 0.0, 0.0, 0.0)).unwrap();
                rec.combined = score(i, j);
                pairs.push(rec);
            }
        }
        PairDiversityTable::from_pairs(n, pairs)
    }

    #[test]
    fn ensemble_diversity_cases() {
        let t = table_with(4, |i, j| (i + j) as f64 / 10.0);
        let pc = DiversityNormalization::PairCount;
        assert_eq!(ensemble_diversity(&EnsembleMask::from_indices(4, &[1, 3]), &t, pc), 0.4);
        assert_eq!(ensemble_diversity(&EnsembleMask::from_indices(4, &[2]), &t, pc), 1.0);
        let t = table_with(5, |_, _| 0.3);
        assert!(close(ensemble_diversity(&EnsembleMask::full(5), &t, pc), 0.3, 1e-15));
        let t = table_with(3, |i, j| match (i, j) {
            (0, 1) => 0.2,
            (0, 2) => 0.4,
            _ => 0.6,
        });
        assert!(close(ensemble_diversity(&EnsembleMask::full(3), &t, pc), 0.4, 1e-15));
        let printed = ensemble_diversity(&EnsembleMask::full(3), &t, DiversityNormalization::ActiveCount);
        assert!(close(printed, 0.4, 1e-15));
    }

    #[test]
    fn table_from_label_matrix() {
        let truth = vec![0, 1, 1, 0, 1];
        let rows = vec![vec![0, 1, 1, 0, 1], vec![0, 1, 0, 0, 0], vec![1, 0, 1, 1, 1]];
        let lm = LabelMatrix::new(SplitTag::Val1, 2, truth, rows).unwrap();
        let t = PairDiversityTable::build(&lm, &Serial);
        assert_eq!(t.pairs().len(), 3);
        let p = &t.pairs()[0];
        assert_eq!((p.i, p.j), (0, 1));
        assert!(close(p.ct.c, 0.4, 1e-15));
        assert_eq!(t.combined(1, 0), t.combined(0, 1));
    }
}
