//! Cross-validated runs of selection protocols and baselines.
//!
//! For each fold the harness builds one pool per classifier mode, caches the
//! pool's label matrices and pair diversity tables in a [`FoldContext`], and
//! lets every protocol with that mode search over the same context.

use std::time::Instant;

use cife_core::baselines::{bagging_full, kappa_prune};
use cife_core::dataset::{make_folds, Dataset, FoldPlan};
use cife_core::diversity::{DiversityNormalization, PairDiversityTable};
use cife_core::evolve::{evolve, Algorithm, EvolutionTrace, EvolverConfig};
use cife_core::exec::Executor;
use cife_core::fitness::{FitnessFunction, FitnessKind, FitnessSpec};
use cife_core::init::{initial_population, InitMode, TuningConfig};
use cife_core::learners::{build_pool, ClassifierMode, ClassifierPool, PoolConfig, PoolPredictions};
use cife_core::predictions::SplitTag;
use cife_core::protocol::ProtocolSpec;
use cife_core::rng::{derive_seed, stream};
use cife_core::vote::evaluate;
use cife_core::EnsembleMask;
use serde::{Deserialize, Serialize};

use crate::report::{median, FoldResult, GridFailure, GridReport, RunReport, RunTiming, SweepReport, FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("fold {fold}: {source}")]
    Fold { fold: usize, source: cife_core::Error },
    #[error(transparent)]
    Core(#[from] cife_core::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Every knob of a cross-validated run. Defaults are the full-scale values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub pool_size: usize,
    pub candidates: usize,
    pub k: usize,
    pub seed: u64,
    pub population_size: usize,
    pub max_generations: usize,
    pub stagnation_fraction: f64,
    pub elitism: f64,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub selection_fraction: f64,
    pub initial_probability: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Weight of pair error against pair diversity in the tuning ranking.
    pub rank_alpha: f64,
    /// Size weight of the pruning fitness; the rest is split evenly.
    pub gamma: f64,
    pub fitness_split: SplitTag,
    pub raw_tuning_scores: bool,
    pub diversity_normalization: DiversityNormalization,
    /// UMDA starts from `initial_probability` instead of the supplied population.
    pub umda_from_prior: bool,
    pub kappa_budget: usize,
    pub tie_epsilon: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        let evo = EvolverConfig::new(Algorithm::Ga, 0);
        Self {
            pool_size: 150,
            candidates: 3000,
            k: 6,
            seed: 0,
            population_size: evo.population_size,
            max_generations: evo.max_generations,
            stagnation_fraction: evo.stagnation_fraction,
            elitism: evo.elitism,
            mutation_rate: evo.mutation_rate,
            crossover_rate: evo.crossover_rate,
            selection_fraction: evo.selection_fraction,
            initial_probability: evo.initial_probability,
            lower_bound: evo.lower_bound,
            upper_bound: evo.upper_bound,
            rank_alpha: 0.5,
            gamma: 0.1,
            fitness_split: SplitTag::Val2,
            raw_tuning_scores: false,
            diversity_normalization: DiversityNormalization::PairCount,
            umda_from_prior: false,
            kappa_budget: 30,
            tie_epsilon: 0.05,
        }
    }
}

impl RunSettings {
    /// Scales candidates, population and generations by `factor`, keeping
    /// at least `pool_size` candidates and 10 individuals and generations.
    pub fn scaled(mut self, factor: f64) -> Self {
        let scale = |v: usize, min: usize| ((v as f64 * factor).round() as usize).max(min);
        self.candidates = scale(self.candidates, self.pool_size);
        self.population_size = scale(self.population_size, 10);
        self.max_generations = scale(self.max_generations, 10);
        self
    }

    pub fn evolver(&self, algorithm: Algorithm, seed: u64) -> EvolverConfig {
        EvolverConfig {
            population_size: self.population_size,
            max_generations: self.max_generations,
            stagnation_fraction: self.stagnation_fraction,
            elitism: self.elitism,
            mutation_rate: self.mutation_rate,
            crossover_rate: self.crossover_rate,
            selection_fraction: self.selection_fraction,
            initial_probability: self.initial_probability,
            lower_bound: self.lower_bound,
            upper_bound: self.upper_bound,
            umda_consume_initial: !self.umda_from_prior,
            ..EvolverConfig::new(algorithm, seed)
        }
    }

    pub fn fitness(&self, kind: FitnessKind) -> FitnessSpec {
        FitnessSpec {
            eval_split: self.fitness_split,
            normalization: self.diversity_normalization,
            ..FitnessSpec::new(kind).with_gamma(self.gamma)
        }
    }

    pub fn tuning(&self) -> TuningConfig {
        TuningConfig { alpha: self.rank_alpha, raw_scores: self.raw_tuning_scores }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 1 || self.pool_size > self.candidates {
            return Err(HarnessError::Invalid(format!(
                "pool size {} must be between 1 and the candidate count {}",
                self.pool_size, self.candidates
            )));
        }
        self.evolver(Algorithm::Ga, 0).validate()?;
        self.fitness(FitnessKind::P).validate()?;
        Ok(())
    }
}

/// A fold's pool with its cached predictions and pair tables.
#[derive(Debug, Clone)]
pub struct FoldContext {
    pub fold: usize,
    pub mode: ClassifierMode,
    pub pool: ClassifierPool,
    pub predictions: PoolPredictions,
    pub val1_table: PairDiversityTable,
    pub fitness_table: PairDiversityTable,
    pub build_seconds: f64,
}

impl FoldContext {
    pub fn build<E: Executor>(ds: &Dataset, plan: &FoldPlan, fold: usize, mode: ClassifierMode, settings: &RunSettings, exec: &E) -> Result<Self> {
        let start = Instant::now();
        let split = &plan.splits[fold];
        let cfg = PoolConfig {
            mode,
            pool_size: settings.pool_size,
            candidates: settings.candidates,
            seed: derive_seed(&[settings.seed, stream::POOL, fold as u64]),
        };
        let wrap = |source| HarnessError::Fold { fold, source };
        let pool = build_pool(ds, split, &cfg, exec).map_err(wrap)?;
        let predictions = PoolPredictions::compute(&pool, ds, split, exec).map_err(wrap)?;
        let mut ctx = Self::from_parts(fold, mode, pool, predictions, settings, exec);
        ctx.build_seconds = start.elapsed().as_secs_f64();
        Ok(ctx)
    }

    pub fn from_parts<E: Executor>(
        fold: usize,
        mode: ClassifierMode,
        pool: ClassifierPool,
        predictions: PoolPredictions,
        settings: &RunSettings,
        exec: &E,
    ) -> Self {
        let val1_table = PairDiversityTable::build(&predictions.val1, exec);
        let fitness_table = match settings.fitness_split {
            SplitTag::Val1 => val1_table.clone(),
            other => PairDiversityTable::build(predictions.get(other), exec),
        };
        Self { fold, mode, pool, predictions, val1_table, fitness_table, build_seconds: 0.0 }
    }

    /// The context of the best `n` members, as if built with pool size `n`.
    pub fn truncated<E: Executor>(&self, n: usize, settings: &RunSettings, exec: &E) -> Self {
        let mut ctx = Self::from_parts(self.fold, self.mode, self.pool.truncated(n), self.predictions.truncated(n), settings, exec);
        ctx.build_seconds = self.build_seconds;
        ctx
    }

    pub fn checksum(&self) -> String {
        format!("{:016x}", self.predictions.checksum())
    }

    pub fn pool_size(&self) -> usize {
        self.predictions.val1.n_classifiers()
    }
}

/// Builds the contexts of every fold for one classifier mode.
pub fn build_contexts<E: Executor>(ds: &Dataset, plan: &FoldPlan, mode: ClassifierMode, settings: &RunSettings, exec: &E) -> Result<Vec<FoldContext>> {
    let folds: Vec<usize> = (0..plan.k).collect();
    exec.map(&folds, |&f| FoldContext::build(ds, plan, f, mode, settings, exec)).into_iter().collect()
}

pub fn fold_plan(ds: &Dataset, settings: &RunSettings) -> Result<FoldPlan> {
    let plan = make_folds(ds, settings.k, settings.seed)?;
    for w in &plan.warnings {
        log::warn!("{}: {w}", ds.name());
    }
    Ok(plan)
}

fn search_seeds(settings: &RunSettings, fold: usize) -> (u64, u64) {
    (
        derive_seed(&[settings.seed, stream::INIT, fold as u64]),
        derive_seed(&[settings.seed, stream::EVOLVE, fold as u64]),
    )
}

/// Generation-0 population of a protocol on a fold.
pub fn initial_population_for(init: InitMode, ctx: &FoldContext, settings: &RunSettings) -> Result<Vec<EnsembleMask>> {
    let (init_seed, _) = search_seeds(settings, ctx.fold);
    let accuracies = ctx.predictions.val1.accuracies();
    Ok(initial_population(init, &ctx.val1_table, &accuracies, &settings.tuning(), settings.population_size, init_seed)?)
}

fn fitness_function<'a>(spec: &ProtocolSpec, ctx: &'a FoldContext, settings: &RunSettings) -> Result<FitnessFunction<'a>> {
    let fs = settings.fitness(spec.fitness);
    Ok(FitnessFunction::new(fs, ctx.predictions.get(fs.eval_split), &ctx.fitness_table)?)
}

/// Best fitness among the generation-0 individuals.
pub fn generation_zero_best(spec: &ProtocolSpec, ctx: &FoldContext, settings: &RunSettings) -> Result<f64> {
    let pop = initial_population_for(spec.init, ctx, settings)?;
    let f = fitness_function(spec, ctx, settings)?;
    Ok(pop.iter().map(|m| f.evaluate(m).value).fold(f64::INFINITY, f64::min))
}

/// Outcome of one protocol on one fold.
#[derive(Debug, Clone)]
pub struct FoldRun {
    pub result: FoldResult,
    pub trace: EvolutionTrace,
    pub seconds: f64,
}

pub fn run_on_fold<E: Executor>(spec: &ProtocolSpec, ctx: &FoldContext, settings: &RunSettings, exec: &E) -> Result<FoldRun> {
    let start = Instant::now();
    let wrap = |source| HarnessError::Fold { fold: ctx.fold, source };
    let (_, evolve_seed) = search_seeds(settings, ctx.fold);
    let population = initial_population_for(spec.init, ctx, settings)?;
    let fitness = fitness_function(spec, ctx, settings)?;
    let cfg = settings.evolver(spec.algorithm, evolve_seed);
    let trace = evolve(&population, &fitness, &cfg, exec).map_err(wrap)?;
    let outcome = evaluate(&trace.best_mask, &ctx.predictions.test).map_err(wrap)?;
    let result = FoldResult {
        fold: ctx.fold,
        test_accuracy: outcome.test_accuracy,
        ensemble_size: outcome.ensemble_size,
        generations_run: trace.generations_run(),
        best_fitness: Some(trace.best_fitness),
        initial_best_fitness: Some(trace.initial_best),
        termination: Some(trace.termination),
        pool_checksum: ctx.checksum(),
        mask: trace.best_mask.to_hex(),
    };
    Ok(FoldRun { result, trace, seconds: start.elapsed().as_secs_f64() })
}

fn assemble(method: String, ds: &Dataset, settings: &RunSettings, contexts: &[FoldContext], runs: Vec<(FoldResult, f64)>) -> (RunReport, RunTiming) {
    let pool_size = contexts.first().map_or(settings.pool_size, FoldContext::pool_size);
    let fold_seconds: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let pool_seconds: Vec<f64> = contexts.iter().map(|c| c.build_seconds).collect();
    let total_seconds = fold_seconds.iter().sum::<f64>() + pool_seconds.iter().sum::<f64>();
    let report = RunReport::new(
        method.clone(),
        ds.name().to_string(),
        pool_size,
        settings.candidates,
        settings.k,
        settings.seed,
        runs.into_iter().map(|r| r.0).collect(),
    );
    let timing = RunTiming { method, dataset: ds.name().to_string(), pool_seconds, fold_seconds, total_seconds };
    (report, timing)
}

/// Runs one protocol over prepared contexts (one per fold).
pub fn run_protocol_on<E: Executor>(spec: &ProtocolSpec, ds: &Dataset, contexts: &[FoldContext], settings: &RunSettings, exec: &E) -> Result<(RunReport, RunTiming)> {
    if contexts.iter().any(|c| c.mode != spec.classifiers) {
        return Err(HarnessError::Invalid(format!("{spec} needs pools of classifier mode {:?}", spec.classifiers)));
    }
    let runs: Vec<Result<FoldRun>> = exec.map(contexts, |ctx| run_on_fold(spec, ctx, settings, exec));
    let runs = runs.into_iter().map(|r| r.map(|r| (r.result, r.seconds))).collect::<Result<Vec<_>>>()?;
    Ok(assemble(spec.name(), ds, settings, contexts, runs))
}

pub fn run_protocol<E: Executor>(spec: &ProtocolSpec, ds: &Dataset, settings: &RunSettings, exec: &E) -> Result<(RunReport, RunTiming)> {
    settings.validate()?;
    let plan = fold_plan(ds, settings)?;
    let contexts = build_contexts(ds, &plan, spec.classifiers, settings, exec)?;
    run_protocol_on(spec, ds, &contexts, settings, exec)
}

/// Runs several protocols, building each classifier mode's pools once.
/// Failures are returned per protocol, in input order.
pub fn run_protocols<E: Executor>(specs: &[ProtocolSpec], ds: &Dataset, settings: &RunSettings, exec: &E) -> Result<Vec<Result<(RunReport, RunTiming)>>> {
    settings.validate()?;
    let plan = fold_plan(ds, settings)?;
    let mut out: Vec<Option<Result<(RunReport, RunTiming)>>> = specs.iter().map(|_| None).collect();
    for mode in [ClassifierMode::M, ClassifierMode::P] {
        let wanted: Vec<usize> = (0..specs.len()).filter(|&i| specs[i].classifiers == mode).collect();
        if wanted.is_empty() {
            continue;
        }
        match build_contexts(ds, &plan, mode, settings, exec) {
            Ok(contexts) => {
                for i in wanted {
                    log::info!("{}: running {}", ds.name(), specs[i]);
                    out[i] = Some(run_protocol_on(&specs[i], ds, &contexts, settings, exec));
                }
            }
            Err(e) => {
                let msg = e.to_string();
                for i in wanted {
                    out[i] = Some(Err(HarnessError::Invalid(msg.clone())));
                }
            }
        }
    }
    Ok(out.into_iter().map(|r| r.expect("every protocol has a mode")).collect())
}

fn grid_from(ds: &Dataset, settings: &RunSettings, pool_size: usize, results: Vec<Result<(RunReport, RunTiming)>>, specs: &[ProtocolSpec]) -> (GridReport, Vec<RunTiming>) {
    let mut runs = Vec::new();
    let mut timings = Vec::new();
    let mut failures = Vec::new();
    for (spec, r) in specs.iter().zip(results) {
        match r {
            Ok((report, timing)) => {
                runs.push(report);
                timings.push(timing);
            }
            Err(e) => {
                log::error!("{}: {spec} failed: {e}", ds.name());
                failures.push(GridFailure { method: spec.name(), error: e.to_string() });
            }
        }
    }
    let grid = GridReport { format_version: FORMAT_VERSION, dataset: ds.name().to_string(), pool_size, seed: settings.seed, runs, failures };
    (grid, timings)
}

/// All 24 protocols on shared pools.
pub fn run_grid<E: Executor>(ds: &Dataset, settings: &RunSettings, exec: &E) -> Result<(GridReport, Vec<RunTiming>)> {
    let specs = ProtocolSpec::all();
    let results = run_protocols(&specs, ds, settings, exec)?;
    Ok(grid_from(ds, settings, settings.pool_size, results, &specs))
}

/// Runs the grid at several pool sizes. Pools are trained once at the
/// largest size; smaller pools are its best-member prefixes.
pub fn pool_size_sweep<E: Executor>(ds: &Dataset, sizes: &[usize], settings: &RunSettings, exec: &E) -> Result<(SweepReport, Vec<RunTiming>)> {
    let Some(&largest) = sizes.iter().max() else {
        return Err(HarnessError::Invalid("no pool sizes given".into()));
    };
    let base = RunSettings { pool_size: largest, candidates: settings.candidates.max(largest), ..settings.clone() };
    base.validate()?;
    let plan = fold_plan(ds, &base)?;
    let specs = ProtocolSpec::all();
    let mut full = Vec::new();
    for mode in [ClassifierMode::M, ClassifierMode::P] {
        full.push((mode, build_contexts(ds, &plan, mode, &base, exec)?));
    }
    let mut grids = Vec::new();
    let mut timings = Vec::new();
    for &size in sizes {
        let sized = RunSettings { pool_size: size, ..base.clone() };
        let mut results: Vec<Option<Result<(RunReport, RunTiming)>>> = specs.iter().map(|_| None).collect();
        for (mode, contexts) in &full {
            let contexts: Vec<FoldContext> = contexts.iter().map(|c| c.truncated(size, &sized, exec)).collect();
            for (i, spec) in specs.iter().enumerate().filter(|(_, s)| s.classifiers == *mode) {
                results[i] = Some(run_protocol_on(spec, ds, &contexts, &sized, exec));
            }
        }
        let results = results.into_iter().map(|r| r.expect("both modes covered")).collect();
        let (grid, t) = grid_from(ds, &sized, size, results, &specs);
        grids.push(grid);
        timings.extend(t);
    }
    let medians = grids.iter().map(|g| median(&g.runs.iter().map(|r| r.accuracy.mean).collect::<Vec<_>>())).collect();
    let report = SweepReport { format_version: FORMAT_VERSION, dataset: ds.name().to_string(), seed: settings.seed, sizes: sizes.to_vec(), grids, medians };
    Ok((report, timings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Baseline {
    /// Majority vote of the whole pool.
    Bagging,
    /// Pairs of lowest κ on validation-1 until the budget is met.
    Kappa,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Bagging => "Bagging",
            Baseline::Kappa => "Kappa",
        }
    }
}

pub fn run_baseline_on<E: Executor>(method: Baseline, ds: &Dataset, contexts: &[FoldContext], settings: &RunSettings, exec: &E) -> Result<(RunReport, RunTiming)> {
    let runs: Vec<Result<(FoldResult, f64)>> = exec.map(contexts, |ctx| {
        let start = Instant::now();
        let wrap = |source| HarnessError::Fold { fold: ctx.fold, source };
        let outcome = match method {
            Baseline::Bagging => bagging_full(&ctx.predictions.test).map_err(wrap)?,
            Baseline::Kappa => {
                let budget = settings.kappa_budget.min(ctx.pool_size());
                let mask = kappa_prune(&ctx.predictions.val1, budget).map_err(wrap)?;
                evaluate(&mask, &ctx.predictions.test).map_err(wrap)?
            }
        };
        let result = FoldResult {
            fold: ctx.fold,
            test_accuracy: outcome.test_accuracy,
            ensemble_size: outcome.ensemble_size,
            generations_run: 0,
            best_fitness: None,
            initial_best_fitness: None,
            termination: None,
            pool_checksum: ctx.checksum(),
            mask: outcome.mask.to_hex(),
        };
        Ok((result, start.elapsed().as_secs_f64()))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(assemble(method.name().to_string(), ds, settings, contexts, runs))
}

pub fn run_baseline<E: Executor>(method: Baseline, mode: ClassifierMode, ds: &Dataset, settings: &RunSettings, exec: &E) -> Result<(RunReport, RunTiming)> {
    settings.validate()?;
    let plan = fold_plan(ds, settings)?;
    let contexts = build_contexts(ds, &plan, mode, settings, exec)?;
    run_baseline_on(method, ds, &contexts, settings, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::two_blobs;
    use cife_core::exec::Serial;

    fn tiny() -> RunSettings {
        RunSettings { pool_size: 8, candidates: 16, k: 4, population_size: 12, max_generations: 6, ..RunSettings::default() }
    }

    #[test]
    fn scaling_keeps_floors() {
        let s = RunSettings::default().scaled(0.2);
        assert_eq!((s.candidates, s.population_size, s.max_generations), (600, 100, 50));
        let s = RunSettings::default().scaled(0.001);
        assert_eq!((s.candidates, s.population_size, s.max_generations), (150, 10, 10));
    }

    #[test]
    fn protocol_report_aggregates_folds() {
        let ds = two_blobs(80, 3);
        let spec = ProtocolSpec::parse("PAE-GA").unwrap();
        let (report, timing) = run_protocol(&spec, &ds, &tiny(), &Serial).unwrap();
        assert_eq!(report.folds.len(), 4);
        assert_eq!(timing.fold_seconds.len(), 4);
        let mean = report.folds.iter().map(|f| f.test_accuracy).sum::<f64>() / 4.0;
        assert!((report.accuracy.mean - mean).abs() < 1e-15);
    }

    #[test]
    fn baselines_run() {
        let ds = two_blobs(80, 4);
        let (bag, _) = run_baseline(Baseline::Bagging, ClassifierMode::P, &ds, &tiny(), &Serial).unwrap();
        assert!(bag.folds.iter().all(|f| f.ensemble_size == 8));
        let (kappa, _) = run_baseline(Baseline::Kappa, ClassifierMode::P, &ds, &tiny(), &Serial).unwrap();
        assert!(kappa.folds.iter().all(|f| f.ensemble_size == 8));
    }

    #[test]
    fn invalid_pool_size_is_rejected() {
        let ds = two_blobs(40, 4);
        let s = RunSettings { pool_size: 20, candidates: 10, ..tiny() };
        assert!(run_protocol(&ProtocolSpec::parse("MAE-GA").unwrap(), &ds, &s, &Serial).is_err());
    }
}
