use alloc::vec::Vec;

use rand::Rng as _;

use super::{check_population, evaluate_all, ranked_order, EvolutionTrace, EvolverConfig, Objective, Termination, Tracker};
use crate::error::Result;
use crate::exec::Executor;
use crate::mask::EnsembleMask;
use crate::rng::{rng_for, stream, Rng};

/// Fitness-proportional wheel for minimization: weight `max_f - f + ε`.
#[derive(Debug, Clone)]
pub struct RouletteWheel {
    cumulative: Vec<f64>,
}

impl RouletteWheel {
    pub fn new(fitness: &[f64], epsilon: f64) -> Self {
        let max_f = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let cumulative = fitness
            .iter()
            .map(|&f| {
                total += max_f - f + epsilon;
                total
            })
            .collect();
        Self { cumulative }
    }

    pub fn spin(&self, rng: &mut Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty wheel");
        let r = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= r).min(self.cumulative.len() - 1)
    }
}

/// Index of one roulette-selected individual.
pub fn ga_select_roulette(fitness: &[f64], epsilon: f64, rng: &mut Rng) -> usize {
    RouletteWheel::new(fitness, epsilon).spin(rng)
}

/// `parent1[..x] ++ parent2[x..]`.
pub fn single_point_crossover(parent1: &EnsembleMask, parent2: &EnsembleMask, x: usize) -> EnsembleMask {
    let mut bits = parent1.bits()[..x].to_vec();
    bits.extend_from_slice(&parent2.bits()[x..]);
    EnsembleMask::from_bits(bits)
}

/// With probability `rate` cuts at a uniform point in [1, n-1]; otherwise
/// copies `parent1`.
pub fn ga_crossover(parent1: &EnsembleMask, parent2: &EnsembleMask, rate: f64, rng: &mut Rng) -> EnsembleMask {
    let n = parent1.len();
    if n < 2 || rng.gen::<f64>() >= rate {
        return parent1.clone();
    }
    let x = rng.gen_range(1..n);
    single_point_crossover(parent1, parent2, x)
}

/// Flips each bit with probability `rate`, then repairs an empty result.
pub fn ga_mutate(mask: &EnsembleMask, rate: f64, repair_index: usize, rng: &mut Rng) -> EnsembleMask {
    let mut out = mask.clone();
    for i in 0..out.len() {
        if rng.gen::<f64>() < rate {
            out.flip(i);
        }
    }
    out.repair(repair_index);
    out
}

pub fn ga_evolve<O: Objective, E: Executor>(
    init: &[EnsembleMask],
    objective: &O,
    cfg: &EvolverConfig,
    exec: &E,
) -> Result<EvolutionTrace> {
    check_population(init, cfg)?;
    let mut population: Vec<EnsembleMask> = init
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.repair(cfg.repair_index);
            m
        })
        .collect();
    let mut fitness = evaluate_all(&population, objective, exec);
    let mut tracker = Tracker::new(cfg.stagnation_limit());
    let elite = cfg.elite_count();
    let offspring: Vec<usize> = (0..cfg.population_size - elite).collect();

    for gen in 0..cfg.max_generations {
        let order = ranked_order(&population, &fitness);
        if tracker.observe(gen, &population, &fitness, &order, None) {
            return Ok(tracker.finish(cfg.algorithm, Termination::Stagnation));
        }
        if gen + 1 == cfg.max_generations {
            break;
        }
        let wheel = RouletteWheel::new(&fitness, cfg.roulette_epsilon);
        let children = exec.map(&offspring, |&o| {
            let mut rng = rng_for(&[cfg.seed, stream::EVOLVE, gen as u64, o as u64]);
            let p1 = &population[wheel.spin(&mut rng)];
            let p2 = &population[wheel.spin(&mut rng)];
            let child = ga_crossover(p1, p2, cfg.crossover_rate, &mut rng);
            let child = ga_mutate(&child, cfg.mutation_rate, cfg.repair_index, &mut rng);
            let f = objective.evaluate(&child);
            (child, f)
        });
        let mut next = Vec::with_capacity(cfg.population_size);
        let mut next_fit = Vec::with_capacity(cfg.population_size);
        for &i in &order[..elite] {
            next.push(population[i].clone());
            next_fit.push(fitness[i]);
        }
        for (child, f) in children {
            next.push(child);
            next_fit.push(f);
        }
        population = next;
        fitness = next_fit;
    }
    Ok(tracker.finish(cfg.algorithm, Termination::MaxGenerations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn m(s: &str) -> EnsembleMask {
        EnsembleMask::parse_binary(s).unwrap()
    }

    #[test]
    fn crossover_by_hand() {
        assert_eq!(single_point_crossover(&m("11100"), &m("00011"), 3), m("11111"));
        assert_eq!(single_point_crossover(&m("10000"), &m("01111"), 1), m("11111"));
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            assert_eq!(ga_crossover(&m("10110"), &m("10110"), 1.0, &mut rng), m("10110"));
        }
        assert_eq!(ga_crossover(&m("11100"), &m("00011"), 0.0, &mut rng), m("11100"));
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = rng_from_seed(2);
        assert_eq!(ga_mutate(&m("10110"), 0.0, 0, &mut rng), m("10110"));
        assert_eq!(ga_mutate(&m("10110"), 1.0, 0, &mut rng), m("01001"));
        assert_eq!(ga_mutate(&m("11111"), 1.0, 2, &mut rng), m("00100"));
    }

    #[test]
    fn roulette_single_and_dominant() {
        let mut rng = rng_from_seed(3);
        assert!((0..100).all(|_| ga_select_roulette(&[0.7], 1e-6, &mut rng) == 0));
        let hits = (0..10_000).filter(|_| ga_select_roulette(&[0.0, 1.0], 1e-6, &mut rng) == 0).count();
        assert!(hits as f64 / 1e4 > 0.99);
    }

    #[test]
    fn constant_fitness_stops_by_stagnation() {
        let cfg = EvolverConfig { population_size: 20, ..EvolverConfig::new(super::super::Algorithm::Ga, 4) };
        let init = crate::init::random_population(20, 10, 4).unwrap();
        let t = ga_evolve(&init, &|_: &EnsembleMask| 0.5, &cfg, &crate::exec::Serial).unwrap();
        assert_eq!(t.termination, Termination::Stagnation);
        assert_eq!(t.generations.last().unwrap().generation, 50);
    }
}
