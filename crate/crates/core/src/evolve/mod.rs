//! Evolutionary search over ensemble masks: a generational GA with
//! roulette selection and elitism, and UMDA with clamped marginals.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::fitness::FitnessFunction;
use crate::mask::EnsembleMask;

mod ga;
mod umda;

pub use ga::{ga_crossover, ga_evolve, ga_mutate, ga_select_roulette, single_point_crossover, RouletteWheel};
pub use umda::{umda_evolve, umda_sample, umda_update, ProbabilityModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Ga,
    Umda,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ga => "GA",
            Algorithm::Umda => "UMDA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolverConfig {
    pub algorithm: Algorithm,
    pub population_size: usize,
    pub max_generations: usize,
    /// Fraction of `max_generations` without improvement that stops the run.
    pub stagnation_fraction: f64,
    pub elitism: f64,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub initial_probability: f64,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub selection_fraction: f64,
    /// Added to every roulette weight so the worst individual keeps a share.
    pub roulette_epsilon: f64,
    /// UMDA builds its first model from the supplied population rather than
    /// sampling generation 0 from `initial_probability`.
    pub umda_consume_initial: bool,
    /// Bit set when an operator produces an empty mask.
    pub repair_index: usize,
    pub seed: u64,
}

impl EvolverConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self {
            algorithm,
            population_size: 500,
            max_generations: 250,
            stagnation_fraction: 0.20,
            elitism: 0.40,
            mutation_rate: 0.05,
            crossover_rate: 0.30,
            initial_probability: 0.50,
            upper_bound: 0.95,
            lower_bound: 0.05,
            selection_fraction: 0.50,
            roulette_epsilon: 1e-6,
            umda_consume_initial: true,
            repair_index: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            self.stagnation_fraction,
            self.elitism,
            self.mutation_rate,
            self.crossover_rate,
            self.initial_probability,
            self.upper_bound,
            self.lower_bound,
            self.selection_fraction,
        ];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(invalid("evolver rates and probabilities must lie in [0, 1]"));
        }
        if !(self.lower_bound < self.initial_probability && self.initial_probability < self.upper_bound) {
            return Err(invalid("UMDA bounds must satisfy lower < initial probability < upper"));
        }
        if self.population_size == 0 || self.max_generations == 0 {
            return Err(invalid("population size and generation count must be at least 1"));
        }
        if self.selection_fraction == 0.0 {
            return Err(invalid("UMDA selection fraction must be positive"));
        }
        Ok(())
    }

    /// Generations without improvement that end a run, at least 1.
    pub fn stagnation_limit(&self) -> usize {
        libm::ceil(self.stagnation_fraction * self.max_generations as f64).max(1.0) as usize
    }

    pub fn elite_count(&self) -> usize {
        (libm::ceil(self.elitism * self.population_size as f64) as usize).min(self.population_size)
    }

    pub fn selected_count(&self) -> usize {
        (libm::ceil(self.selection_fraction * self.population_size as f64) as usize).clamp(1, self.population_size)
    }
}

/// A minimized objective over masks.
pub trait Objective: Sync {
    fn evaluate(&self, mask: &EnsembleMask) -> f64;
}

impl<F: Fn(&EnsembleMask) -> f64 + Sync> Objective for F {
    fn evaluate(&self, mask: &EnsembleMask) -> f64 {
        self(mask)
    }
}

impl Objective for FitnessFunction<'_> {
    fn evaluate(&self, mask: &EnsembleMask) -> f64 {
        FitnessFunction::evaluate(self, mask).value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxGenerations,
    Stagnation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Best fitness seen up to and including this generation.
    pub best_found: f64,
    /// Smallest and largest UMDA marginal after this generation's update.
    pub marginal_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub algorithm: Algorithm,
    pub generations: Vec<GenerationRecord>,
    pub best_mask: EnsembleMask,
    pub best_fitness: f64,
    /// Generations since the last strict improvement when the run stopped.
    pub stagnation_counter: usize,
    pub termination: Termination,
    /// Fitness of the best generation-0 individual.
    pub initial_best: f64,
}

impl EvolutionTrace {
    pub fn generations_run(&self) -> usize {
        self.generations.len()
    }
}

/// Population order used everywhere: fitness, then fewer active bits, then
/// lexicographic mask.
pub fn compare_individuals(fa: f64, a: &EnsembleMask, fb: f64, b: &EnsembleMask) -> Ordering {
    fa.total_cmp(&fb).then(a.count_ones().cmp(&b.count_ones())).then_with(|| a.lex_cmp(b))
}

/// Indices of `population` from fittest to least fit.
pub fn ranked_order(population: &[EnsembleMask], fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&x, &y| compare_individuals(fitness[x], &population[x], fitness[y], &population[y]));
    order
}

pub(crate) fn check_population(population: &[EnsembleMask], cfg: &EvolverConfig) -> Result<usize> {
    cfg.validate()?;
    if population.len() != cfg.population_size {
        return Err(crate::Error::LengthMismatch { expected: cfg.population_size, actual: population.len() });
    }
    let n = population[0].len();
    if n == 0 || population.iter().any(|m| m.len() != n) {
        return Err(invalid("population masks must share a non-zero length"));
    }
    if cfg.repair_index >= n {
        return Err(invalid("repair index outside the pool"));
    }
    Ok(n)
}

/// Running bookkeeping shared by both algorithms.
pub(crate) struct Tracker {
    records: Vec<GenerationRecord>,
    best_mask: Option<EnsembleMask>,
    best_fitness: f64,
    last_improvement: usize,
    limit: usize,
}

impl Tracker {
    pub(crate) fn new(limit: usize) -> Self {
        Self { records: Vec::new(), best_mask: None, best_fitness: f64::INFINITY, last_improvement: 0, limit }
    }

    /// Records generation `gen` given its population in ranked order.
    /// Returns whether the run should stop for stagnation.
    pub(crate) fn observe(
        &mut self,
        gen: usize,
        population: &[EnsembleMask],
        fitness: &[f64],
        order: &[usize],
        marginal_range: Option<(f64, f64)>,
    ) -> bool {
        let top = order[0];
        let (best, mask) = (fitness[top], &population[top]);
        if self.best_mask.is_none() || best < self.best_fitness {
            if self.best_mask.is_some() {
                self.last_improvement = gen;
            }
            self.best_fitness = best;
            self.best_mask = Some(mask.clone());
        }
        let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;
        self.records.push(GenerationRecord { generation: gen, best, mean, best_found: self.best_fitness, marginal_range });
        gen - self.last_improvement >= self.limit
    }

    pub(crate) fn finish(self, algorithm: Algorithm, termination: Termination) -> EvolutionTrace {
        let last = self.records.last().map_or(0, |r| r.generation);
        let initial_best = self.records.first().map_or(f64::INFINITY, |r| r.best);
        EvolutionTrace {
            algorithm,
            generations: self.records,
            best_mask: self.best_mask.expect("at least one generation observed"),
            best_fitness: self.best_fitness,
            stagnation_counter: last - self.last_improvement,
            termination,
            initial_best,
        }
    }
}

/// Runs the algorithm selected by `cfg`.
pub fn evolve<O: Objective, E: Executor>(
    init: &[EnsembleMask],
    objective: &O,
    cfg: &EvolverConfig,
    exec: &E,
) -> Result<EvolutionTrace> {
    match cfg.algorithm {
        Algorithm::Ga => ga_evolve(init, objective, cfg, exec),
        Algorithm::Umda => umda_evolve(init, objective, cfg, exec),
    }
}

/// Evaluates a population, keeping input order.
pub(crate) fn evaluate_all<O: Objective, E: Executor>(population: &[EnsembleMask], objective: &O, exec: &E) -> Vec<f64> {
    exec.map(population, |m| objective.evaluate(m))
}
