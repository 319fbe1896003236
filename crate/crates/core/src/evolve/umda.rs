use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_population, evaluate_all, ranked_order, EvolutionTrace, EvolverConfig, Objective, Termination, Tracker};
use crate::error::Result;
use crate::exec::Executor;
use crate::mask::EnsembleMask;
use crate::rng::{rng_for, stream, Rng};

/// Independent per-bit probabilities of a set bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityModel {
    pub p: Vec<f64>,
}

impl ProbabilityModel {
    pub fn uniform(n: usize, p0: f64) -> Self {
        Self { p: alloc::vec![p0; n] }
    }

    pub fn range(&self) -> (f64, f64) {
        let lo = self.p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Bernoulli draw per bit; an empty draw is repaired.
pub fn umda_sample(model: &ProbabilityModel, repair_index: usize, rng: &mut Rng) -> EnsembleMask {
    let mut mask = EnsembleMask::from_bits(model.p.iter().map(|&p| rng.gen::<f64>() < p).collect());
    mask.repair(repair_index);
    mask
}

/// Marginal bit frequencies of the fittest `selection_fraction` of the
/// population, clamped to the configured bounds.
pub fn umda_update(population: &[EnsembleMask], fitness: &[f64], cfg: &EvolverConfig) -> ProbabilityModel {
    let order = ranked_order(population, fitness);
    model_from_ranked(population, &order, cfg)
}

fn model_from_ranked(population: &[EnsembleMask], order: &[usize], cfg: &EvolverConfig) -> ProbabilityModel {
    let n = population[0].len();
    let mu = cfg.selected_count().min(order.len());
    let mut counts = alloc::vec![0usize; n];
    for &idx in &order[..mu] {
        for (c, &b) in counts.iter_mut().zip(population[idx].bits()) {
            *c += usize::from(b);
        }
    }
    let p = counts.iter().map(|&c| (c as f64 / mu as f64).clamp(cfg.lower_bound, cfg.upper_bound)).collect();
    ProbabilityModel { p }
}

pub fn umda_evolve<O: Objective, E: Executor>(
    init: &[EnsembleMask],
    objective: &O,
    cfg: &EvolverConfig,
    exec: &E,
) -> Result<EvolutionTrace> {
    let n = check_population(init, cfg)?;
    let slots: Vec<usize> = (0..cfg.population_size).collect();
    let sample_generation = |gen: usize, model: &ProbabilityModel| -> Vec<(EnsembleMask, f64)> {
        exec.map(&slots, |&i| {
            let mut rng = rng_for(&[cfg.seed, stream::EVOLVE, gen as u64, i as u64]);
            let mask = umda_sample(model, cfg.repair_index, &mut rng);
            let f = objective.evaluate(&mask);
            (mask, f)
        })
    };

    let (mut population, mut fitness): (Vec<EnsembleMask>, Vec<f64>) = if cfg.umda_consume_initial {
        let pop: Vec<EnsembleMask> = init
            .iter()
            .map(|m| {
                let mut m = m.clone();
                m.repair(cfg.repair_index);
                m
            })
            .collect();
        let fit = evaluate_all(&pop, objective, exec);
        (pop, fit)
    } else {
        sample_generation(0, &ProbabilityModel::uniform(n, cfg.initial_probability)).into_iter().unzip()
    };

    let mut tracker = Tracker::new(cfg.stagnation_limit());
    for gen in 0..cfg.max_generations {
        let order = ranked_order(&population, &fitness);
        let model = model_from_ranked(&population, &order, cfg);
        let range = model.range();
        assert!(
            range.0 >= cfg.lower_bound && range.1 <= cfg.upper_bound,
            "UMDA marginals left their bounds at generation {gen}"
        );
        if tracker.observe(gen, &population, &fitness, &order, Some(range)) {
            return Ok(tracker.finish(cfg.algorithm, Termination::Stagnation));
        }
        if gen + 1 == cfg.max_generations {
            break;
        }
        (population, fitness) = sample_generation(gen + 1, &model).into_iter().unzip();
    }
    Ok(tracker.finish(cfg.algorithm, Termination::MaxGenerations))
}

#[cfg(test)]
mod tests {
    use super::super::Algorithm;
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn update_reproduces_worked_example() {
        let pop: Vec<EnsembleMask> = ["11001", "10101", "01010", "00110"]
            .iter()
            .map(|s| EnsembleMask::parse_binary(s).unwrap())
            .collect();
        let fitness = [0.1, 0.2, 0.6, 0.7];
        let cfg = EvolverConfig { population_size: 4, ..EvolverConfig::new(Algorithm::Umda, 0) };
        let model = umda_update(&pop, &fitness, &cfg);
        assert_eq!(model.p, [0.95, 0.5, 0.5, 0.05, 0.95]);
    }

    #[test]
    fn update_identity_inside_bounds() {
        let pop: Vec<EnsembleMask> = ["10", "01", "11", "00", "10"].iter().map(|s| EnsembleMask::parse_binary(s).unwrap()).collect();
        let cfg = EvolverConfig { population_size: 5, selection_fraction: 1.0, ..EvolverConfig::new(Algorithm::Umda, 0) };
        assert_eq!(umda_update(&pop, &[0.0; 5], &cfg).p, [0.6, 0.4]);
    }

    #[test]
    fn sample_is_deterministic() {
        let model = ProbabilityModel::uniform(40, 0.5);
        let a = umda_sample(&model, 0, &mut rng_from_seed(9));
        let b = umda_sample(&model, 0, &mut rng_from_seed(9));
        assert_eq!(a, b);
    }
}
