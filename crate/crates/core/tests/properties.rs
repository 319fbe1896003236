use cife_core::diversity::{ensemble_diversity, measure, orient_normalize, pair_combined, DiversityNormalization, MeasureKind, PairDiversityTable};
use cife_core::evolve::{umda_evolve, Algorithm, EvolverConfig};
use cife_core::exec::Serial;
use cife_core::fitness::{FitnessFunction, FitnessKind, FitnessSpec};
use cife_core::init::{build_histogram, rank_pairs, roulette_population, PairScore, RankedPairList};
use cife_core::predictions::{accuracy, contingency, ContingencyFractions, LabelMatrix, SplitTag};
use cife_core::vote::{evaluate, majority_vote};
use cife_core::EnsembleMask;
use proptest::prelude::*;

fn label_matrix(n: usize, m: usize, l: usize) -> impl Strategy<Value = LabelMatrix> {
    (prop::collection::vec(0..l, m), prop::collection::vec(prop::collection::vec(0..l, m), n))
        .prop_map(move |(truth, rows)| LabelMatrix::new(SplitTag::Val2, l, truth, rows).unwrap())
}

fn fractions() -> impl Strategy<Value = ContingencyFractions> {
    (0u32..50, 0u32..50, 0u32..50, 0u32..50)
        .prop_filter("non-empty", |(a, b, c, d)| a + b + c + d > 0)
        .prop_map(|(a, b, c, d)| ContingencyFractions::from_counts(a as usize, b as usize, c as usize, d as usize))
}

proptest! {
    #[test]
    fn contingency_identities(lm in label_matrix(2, 30, 3)) {
        let (ri, rj, t) = (lm.row(0), lm.row(1), lm.truth());
        let c = contingency(ri, rj, t).unwrap();
        prop_assert!((c.a + c.c - accuracy(ri, t).unwrap()).abs() < 1e-12);
        prop_assert!((c.a + c.b - accuracy(rj, t).unwrap()).abs() < 1e-12);
        prop_assert_eq!(contingency(rj, ri, t).unwrap(), c.swapped());
    }

    #[test]
    fn oriented_scores_stay_in_unit_interval(ct in fractions()) {
        let mut oriented = [0.0; 5];
        for (o, k) in oriented.iter_mut().zip(MeasureKind::ALL) {
            let raw = measure(k, &ct);
            let (lo, hi) = k.raw_range();
            prop_assert!(raw >= lo - 1e-12 && raw <= hi + 1e-12);
            *o = orient_normalize(k, raw).unwrap();
            prop_assert!((0.0..=1.0).contains(o));
        }
        prop_assert!((0.0..=1.0).contains(&pair_combined(&oriented)));
    }

    #[test]
    fn fitness_values_in_unit_interval(lm in label_matrix(6, 20, 2), bits in prop::collection::vec(any::<bool>(), 6)) {
        let table = PairDiversityTable::build(&lm, &Serial);
        let mut mask = EnsembleMask::from_bits(bits);
        mask.repair(0);
        for kind in [FitnessKind::E, FitnessKind::D, FitnessKind::P] {
            let f = FitnessFunction::new(FitnessSpec::new(kind), &lm, &table).unwrap();
            let v = f.evaluate(&mask);
            prop_assert!((0.0..=1.0).contains(&v.value));
            if kind == FitnessKind::P {
                let spec = FitnessSpec::new(kind);
                let again = spec.alpha * v.e_m + spec.beta * v.d_m.unwrap() + spec.gamma * v.t_p.unwrap();
                prop_assert_eq!(again.to_bits(), v.value.to_bits());
            }
        }
    }

    #[test]
    fn pruning_penalty_prefers_smaller_equivalent_masks(lm in label_matrix(1, 20, 2)) {
        // identical members: every mask of two or more has the same error and diversity
        let rows = vec![lm.row(0).to_vec(); 5];
        let same = LabelMatrix::new(SplitTag::Val2, 2, lm.truth().to_vec(), rows).unwrap();
        let table = PairDiversityTable::build(&same, &Serial);
        let f = FitnessFunction::new(FitnessSpec::new(FitnessKind::P), &same, &table).unwrap();
        let small = f.evaluate(&EnsembleMask::from_indices(5, &[0, 1]));
        let large = f.evaluate(&EnsembleMask::from_indices(5, &[0, 1, 3]));
        prop_assert_eq!(small.e_m, large.e_m);
        prop_assert!((small.d_m.unwrap() - large.d_m.unwrap()).abs() < 1e-12);
        prop_assert!(small.value < large.value);
        let e = FitnessFunction::new(FitnessSpec::new(FitnessKind::E), &same, &table).unwrap();
        prop_assert_eq!(e.evaluate(&EnsembleMask::from_indices(5, &[0])).value, e.evaluate(&EnsembleMask::full(5)).value);
    }

    #[test]
    fn vote_is_permutation_invariant(lm in label_matrix(5, 12, 3), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let rows: Vec<Vec<usize>> = perm.iter().map(|&i| lm.row(i).to_vec()).collect();
        let shuffled = LabelMatrix::new(SplitTag::Test, 3, lm.truth().to_vec(), rows).unwrap();
        let a = evaluate(&EnsembleMask::full(5), &lm).unwrap();
        let b = evaluate(&EnsembleMask::full(5), &shuffled).unwrap();
        prop_assert_eq!(a.per_instance_votes, b.per_instance_votes);
    }

    #[test]
    fn duplicated_votes_never_lose_influence(votes in prop::collection::vec(0usize..3, 1..9), extra in 0usize..3) {
        let winner = majority_vote(&votes).unwrap();
        let mut more = votes.clone();
        more.push(winner);
        more.push(winner);
        prop_assert_eq!(majority_vote(&more).unwrap(), winner);
        let _ = extra;
    }

    #[test]
    fn ranked_list_is_sorted_permutation(scores in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6)) {
        let mut pairs = Vec::new();
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                pairs.push(PairScore { i, j, score_dc: scores[k].0, error: scores[k].1 });
                k += 1;
            }
        }
        let ranked = rank_pairs(&pairs, 0.5).unwrap();
        let mut naive: Vec<(f64, usize, usize)> = pairs.iter().map(|p| (0.5 * p.error + 0.5 * p.score_dc, p.i, p.j)).collect();
        naive.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let got: Vec<(f64, usize, usize)> = ranked.entries.iter().map(|e| (e.score, e.i, e.j)).collect();
        prop_assert_eq!(got, naive);
    }

    #[test]
    fn histogram_is_minimal_and_roulette_respects_k(order in Just((0..10usize).collect::<Vec<_>>()).prop_shuffle(), seed in any::<u64>()) {
        let mut all = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                all.push((i, j));
            }
        }
        let entries = order.iter().enumerate().map(|(rank, &p)| cife_core::init::RankedEntry { i: all[p].0, j: all[p].1, score: rank as f64 }).collect();
        let ranked = RankedPairList::from_entries(entries);
        let h = build_histogram(&ranked, 5).unwrap();
        prop_assert!(h.frequency.iter().all(|&f| f >= 1));
        let mut before = vec![0usize; 5];
        for e in &ranked.entries[..h.cut_row - 1] {
            before[e.i] += 1;
            before[e.j] += 1;
        }
        prop_assert!(before.iter().any(|&f| f == 0));
        for m in roulette_population(&h, 20, 5, seed).unwrap() {
            prop_assert!(m.count_ones() >= 1);
        }
    }

    #[test]
    fn diversity_table_symmetric_lookup(lm in label_matrix(5, 15, 2)) {
        let t = PairDiversityTable::build(&lm, &Serial);
        for i in 0..5 {
            for j in 0..5 {
                prop_assert_eq!(t.combined(i, j), t.combined(j, i));
            }
        }
        let d = ensemble_diversity(&EnsembleMask::full(5), &t, DiversityNormalization::PairCount);
        prop_assert!((0.0..=1.0).contains(&d));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn umda_marginals_stay_bounded(seed in any::<u64>()) {
        let cfg = EvolverConfig { population_size: 40, max_generations: 30, ..EvolverConfig::new(Algorithm::Umda, seed) };
        let init = cife_core::init::random_population(40, 12, seed).unwrap();
        let trace = umda_evolve(&init, &|m: &EnsembleMask| (m.count_ones() as f64 - 4.0).abs(), &cfg, &Serial).unwrap();
        for g in &trace.generations {
            let (lo, hi) = g.marginal_range.unwrap();
            prop_assert!(lo >= 0.05 && hi <= 0.95);
        }
    }
}
