//! Initial populations: uniform random masks, or masks drawn from a
//! diversity/accuracy ranked pair list through a frequency roulette.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::diversity::{aggregate_scores, PairDiversityTable};
use crate::error::{invalid, Result};
use crate::mask::EnsembleMask;
use crate::rng::{rng_for, stream, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitMode {
    /// Uniform random cardinality and members.
    A,
    /// Ranked pair list, histogram and roulette.
    T,
}

fn check_sizes(pop_size: usize, pool_size: usize) -> Result<()> {
    if pop_size == 0 || pool_size == 0 {
        return Err(invalid("population and pool sizes must be at least 1"));
    }
    Ok(())
}

fn individual_rng(seed: u64, index: usize) -> Rng {
    rng_for(&[seed, stream::INIT, index as u64])
}

/// Each mask draws k uniform in [1, pool_size], then k distinct members.
pub fn random_population(pop_size: usize, pool_size: usize, seed: u64) -> Result<Vec<EnsembleMask>> {
    check_sizes(pop_size, pool_size)?;
    Ok((0..pop_size)
        .map(|idx| {
            let mut rng = individual_rng(seed, idx);
            let k = rng.gen_range(1..=pool_size);
            let chosen = sample(&mut rng, pool_size, k).into_vec();
            EnsembleMask::from_indices(pool_size, &chosen)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

/// Classifier pairs sorted ascending by score, ties by (i, j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPairList {
    pub entries: Vec<RankedEntry>,
}

impl RankedPairList {
    pub fn from_entries(mut entries: Vec<RankedEntry>) -> Self {
        entries.sort_by(|x, y| x.score.partial_cmp(&y.score).unwrap_or(Ordering::Equal).then((x.i, x.j).cmp(&(y.i, y.j))));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One pair's inputs to the ranking mix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub i: usize,
    pub j: usize,
    /// Aggregated diversity score (product form).
    pub score_dc: f64,
    /// One minus the pair's mean accuracy.
    pub error: f64,
}

/// score_rank = α·error + (1−α)·score_dc
pub fn rank_pairs(pairs: &[PairScore], alpha: f64) -> Result<RankedPairList> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(alloc::format!("ranking weight {alpha} must lie in (0, 1)")));
    }
    let entries = pairs
        .iter()
        .map(|p| RankedEntry { i: p.i, j: p.j, score: alpha * p.error + (1.0 - alpha) * p.score_dc })
        .collect();
    Ok(RankedPairList::from_entries(entries))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    pub alpha: f64,
    /// Mix the product score unscaled instead of min-max rescaling it to [0, 1].
    pub raw_scores: bool,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self { alpha: 0.5, raw_scores: false }
    }
}

/// Builds the final ranked list from a pair table and per-classifier accuracies.
pub fn tuning_ranked_list(table: &PairDiversityTable, accuracies: &[f64], cfg: &TuningConfig) -> Result<RankedPairList> {
    if accuracies.len() != table.pool_size() {
        return Err(crate::Error::LengthMismatch { expected: table.pool_size(), actual: accuracies.len() });
    }
    let mut pairs: Vec<PairScore> = table
        .pairs()
        .iter()
        .map(|r| PairScore {
            i: r.i,
            j: r.j,
            score_dc: aggregate_scores(&r.oriented),
            error: 1.0 - (accuracies[r.i] + accuracies[r.j]) / 2.0,
        })
        .collect();
    if !cfg.raw_scores {
        let lo = pairs.iter().map(|p| p.score_dc).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|p| p.score_dc).fold(f64::NEG_INFINITY, f64::max);
        for p in &mut pairs {
            p.score_dc = if hi > lo { (p.score_dc - lo) / (hi - lo) } else { 0.0 };
        }
    }
    rank_pairs(&pairs, cfg.alpha)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierHistogram {
    pub frequency: Vec<usize>,
    /// Number of ranked rows consumed.
    pub cut_row: usize,
}

/// Consumes ranked rows until every classifier has appeared at least once.
pub fn build_histogram(ranked: &RankedPairList, pool_size: usize) -> Result<ClassifierHistogram> {
    if pool_size < 2 {
        return Err(invalid("a histogram needs a pool of at least 2 classifiers"));
    }
    let mut frequency = alloc::vec![0usize; pool_size];
    let mut missing = pool_size;
    for (row, e) in ranked.entries.iter().enumerate() {
        for c in [e.i, e.j] {
            if c >= pool_size {
                return Err(invalid(alloc::format!("ranked pair member {c} outside a pool of {pool_size}")));
            }
            if frequency[c] == 0 {
                missing -= 1;
            }
            frequency[c] += 1;
        }
        if missing == 0 {
            return Ok(ClassifierHistogram { frequency, cut_row: row + 1 });
        }
    }
    Err(invalid("ranked list does not cover every classifier"))
}

/// Frequency-proportional wheel over classifiers.
#[derive(Debug, Clone)]
pub struct FrequencyRoulette {
    cumulative: Vec<u64>,
}

impl FrequencyRoulette {
    pub fn new(hist: &ClassifierHistogram) -> Result<Self> {
        if hist.frequency.iter().any(|&f| f == 0) {
            return Err(invalid("every histogram frequency must be at least 1"));
        }
        let mut total = 0u64;
        let cumulative = hist
            .frequency
            .iter()
            .map(|&f| {
                total += f as u64;
                total
            })
            .collect();
        Ok(Self { cumulative })
    }

    pub fn spin(&self, rng: &mut Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty wheel");
        let r = rng.gen_range(0..total);
        self.cumulative.partition_point(|&c| c <= r)
    }
}

/// Each mask draws k uniform in [1, pool_size], then spins the roulette
/// until k distinct classifiers are collected.
pub fn roulette_population(hist: &ClassifierHistogram, pop_size: usize, pool_size: usize, seed: u64) -> Result<Vec<EnsembleMask>> {
    check_sizes(pop_size, pool_size)?;
    if hist.frequency.len() != pool_size {
        return Err(crate::Error::LengthMismatch { expected: pool_size, actual: hist.frequency.len() });
    }
    let wheel = FrequencyRoulette::new(hist)?;
    Ok((0..pop_size)
        .map(|idx| {
            let mut rng = individual_rng(seed, idx);
            let k = rng.gen_range(1..=pool_size);
            let mut mask = EnsembleMask::empty(pool_size);
            let mut collected = 0;
            while collected < k {
                let c = wheel.spin(&mut rng);
                if !mask.get(c) {
                    mask.set(c, true);
                    collected += 1;
                }
            }
            mask
        })
        .collect())
}

/// Full tuning pipeline: ranked list, histogram, roulette population.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningOutcome {
    pub ranked: RankedPairList,
    pub histogram: ClassifierHistogram,
    pub population: Vec<EnsembleMask>,
}

pub fn tuning_population(
    table: &PairDiversityTable,
    accuracies: &[f64],
    cfg: &TuningConfig,
    pop_size: usize,
    seed: u64,
) -> Result<TuningOutcome> {
    let ranked = tuning_ranked_list(table, accuracies, cfg)?;
    let histogram = build_histogram(&ranked, table.pool_size())?;
    let population = roulette_population(&histogram, pop_size, table.pool_size(), seed)?;
    Ok(TuningOutcome { ranked, histogram, population })
}

/// Mode A or T population for a pool; mode T on a one-member pool falls back to A.
pub fn initial_population(
    mode: InitMode,
    table: &PairDiversityTable,
    accuracies: &[f64],
    cfg: &TuningConfig,
    pop_size: usize,
    seed: u64,
) -> Result<Vec<EnsembleMask>> {
    match mode {
        InitMode::T if table.pool_size() >= 2 => Ok(tuning_population(table, accuracies, cfg, pop_size, seed)?.population),
        _ => random_population(pop_size, table.pool_size(), seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Ranked list with 1-based classifier ids, as printed in the worked example.
    pub(crate) fn example_list() -> RankedPairList {
        let rows = [
            (2, 4, 0.064),
            (4, 5, 0.169),
            (1, 5, 0.210),
            (2, 6, 0.265),
            (2, 5, 0.308),
            (1, 6, 0.400),
            (1, 2, 0.487),
            (3, 6, 0.519),
            (4, 6, 0.634),
            (3, 5, 0.636),
            (5, 6, 0.643),
            (1, 4, 0.673),
            (2, 3, 0.693),
            (1, 3, 0.821),
            (3, 4, 0.872),
        ];
        RankedPairList::from_entries(rows.iter().map(|&(i, j, score)| RankedEntry { i: i - 1, j: j - 1, score }).collect())
    }

    #[test]
    fn histogram_of_worked_example() {
        let h = build_histogram(&example_list(), 6).unwrap();
        assert_eq!(h.cut_row, 8);
        assert_eq!(h.frequency, vec![3, 4, 1, 2, 3, 3]);
    }

    #[test]
    fn histogram_small_cases() {
        let two = RankedPairList::from_entries(vec![RankedEntry { i: 0, j: 1, score: 0.3 }]);
        let h = build_histogram(&two, 2).unwrap();
        assert_eq!((h.cut_row, h.frequency), (1, vec![1, 1]));
        assert!(build_histogram(&two, 1).is_err());

        let matching = RankedPairList::from_entries(vec![
            RankedEntry { i: 0, j: 1, score: 0.1 },
            RankedEntry { i: 2, j: 3, score: 0.2 },
            RankedEntry { i: 0, j: 2, score: 0.3 },
        ]);
        let h = build_histogram(&matching, 4).unwrap();
        assert_eq!((h.cut_row, h.frequency), (2, vec![1, 1, 1, 1]));
    }

    #[test]
    fn rank_mix() {
        let p = [PairScore { i: 0, j: 1, score_dc: 0.2, error: 0.3 }];
        assert!((rank_pairs(&p, 0.5).unwrap().entries[0].score - 0.25).abs() < 1e-15);
        let z = [PairScore { i: 0, j: 1, score_dc: 0.0, error: 0.0 }];
        assert_eq!(rank_pairs(&z, 0.3).unwrap().entries[0].score, 0.0);
        assert!(rank_pairs(&p, 1.0).is_err());

        let same: Vec<PairScore> = [(1, 2), (0, 2), (0, 1)].iter().map(|&(i, j)| PairScore { i, j, score_dc: 0.5, error: 0.5 }).collect();
        let order: Vec<(usize, usize)> = rank_pairs(&same, 0.5).unwrap().entries.iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(order, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn random_population_cases() {
        for m in random_population(20, 1, 3).unwrap() {
            assert_eq!(m.bits(), &[true]);
        }
        assert_eq!(random_population(30, 40, 9).unwrap(), random_population(30, 40, 9).unwrap());
        assert!(random_population(0, 4, 1).is_err());
    }

    #[test]
    fn roulette_forced_full() {
        let h = ClassifierHistogram { frequency: vec![1, 1], cut_row: 1 };
        for m in roulette_population(&h, 50, 2, 5).unwrap() {
            assert!(m.count_ones() >= 1);
        }
        let zero = ClassifierHistogram { frequency: vec![1, 0], cut_row: 1 };
        assert!(roulette_population(&zero, 5, 2, 5).is_err());
    }
}
