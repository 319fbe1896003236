use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cife::exec::RayonExecutor;
use cife::harness::{self, Baseline, FoldContext, RunSettings};
use cife::io::{fold_plan_json, load_csv, CsvOptions, HeaderMode, LabelColumn};
use cife::poolfile::{self, PoolFile, POOL_FORMAT_VERSION};
use cife::report::{render_timing, runs_to_csv, ComparisonTable, GridReport, RunReport, RunTiming};
use cife_core::dataset::Dataset;
use cife_core::diversity::DiversityNormalization;
use cife_core::learners::ClassifierMode;
use cife_core::predictions::SplitTag;
use cife_core::protocol::ProtocolSpec;
use cife_core::stats::{wilcoxon_exact, wilcoxon_normal, wilcoxon_signed_rank, WilcoxonResult};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cife", version, about = "Evolutionary selection of classifier ensembles")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol with k-fold cross-validation.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Protocol name, e.g. MTD-UMDA.
        #[arg(long)]
        protocol: String,
        #[command(flatten)]
        out: OutArgs,
        /// Write one pool file per fold into this directory.
        #[arg(long)]
        save_pools: Option<PathBuf>,
    },
    /// Run all 24 protocols on shared pools.
    Grid {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the grid for several pool sizes and tabulate median accuracies.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "50,100,150,200,250")]
        sizes: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run a reference selector on the same pools.
    Baseline {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        method: BaselineArg,
        /// Kappa pruning target size.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, value_enum, default_value = "m")]
        classifiers: ModeArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Wilcoxon signed-rank test between two sets of reports.
    Stats {
        /// Two report files (single run, list of runs, or grid).
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        wilcoxon: Vec<PathBuf>,
        /// Pair per fold of matching runs, or per dataset on mean accuracy.
        #[arg(long, value_enum, default_value = "dataset")]
        pair_by: PairBy,
        #[arg(long, value_enum, default_value = "auto")]
        test: TestArg,
    },
    /// Render comparison tables.
    Report {
        /// Published accuracies of the reference methods with win/tie/loss
        /// and Wilcoxon p-values.
        #[arg(long)]
        table6: bool,
        /// Report files whose methods are added to the comparison.
        #[arg(long = "with", num_args = 1..)]
        with: Vec<PathBuf>,
        /// Method the p-values are computed against.
        #[arg(long, default_value = "MTD-UMDA")]
        against: String,
        #[arg(long, default_value_t = 0.05)]
        tie_epsilon: f64,
        /// Timing files to tabulate.
        #[arg(long, num_args = 1..)]
        timing: Vec<PathBuf>,
        /// Methods compared in the timing table, as A/B.
        #[arg(long, default_value = "MTD-UMDA/PTP-UMDA")]
        ratio: String,
    },
    /// Write the stratified fold assignment as JSON.
    ExportFolds {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 6)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV file, one instance per line.
    #[arg(long)]
    dataset: PathBuf,
    /// Label column: `last`, a zero-based index, or a header name.
    #[arg(long, default_value = "last")]
    label_column: LabelColumn,
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file of run settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplies candidates, population and generations.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    rank_alpha: Option<f64>,
    #[arg(long, value_enum)]
    fitness_split: Option<SplitArg>,
    /// Rank pairs on the unscaled diversity product.
    #[arg(long)]
    raw_tuning_scores: bool,
    /// Divide summed pair diversity by the member count instead of the pair count.
    #[arg(long)]
    active_count_diversity: bool,
    /// Start UMDA from the prior probability rather than the initial population.
    #[arg(long)]
    umda_from_prior: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV line per fold here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Timing path; defaults to the report path with a `.timing.json` extension.
    #[arg(long)]
    timing: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Kappa,
    Bagging,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    M,
    P,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairBy {
    Fold,
    Dataset,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Auto,
    Exact,
    Normal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Val1,
    Val2,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeaderArg {
    Auto,
    Yes,
    No,
}

fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    let header = match args.header {
        HeaderArg::Auto => HeaderMode::Auto,
        HeaderArg::Yes => HeaderMode::Present,
        HeaderArg::No => HeaderMode::Absent,
    };
    let ds = load_csv(&args.dataset, &CsvOptions { label: args.label_column.clone(), header })?;
    log::info!("{}: {} instances, {} attributes, {} classes", ds.name(), ds.len(), ds.n_attributes(), ds.class_count());
    Ok(ds)
}

fn settings(args: &RunArgs) -> Result<(RunSettings, RayonExecutor)> {
    let mut s = match &args.config {
        Some(p) => cife::config::load_settings(p)?,
        None => RunSettings::default(),
    };
    if let Some(v) = args.pool_size {
        s.pool_size = v;
    }
    if let Some(v) = args.folds {
        s.k = v;
    }
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(f) = args.scale {
        if !(f > 0.0) {
            bail!("--scale must be positive");
        }
        s = s.scaled(f);
    }
    if let Some(v) = args.candidates {
        s.candidates = v;
    }
    if let Some(v) = args.population {
        s.population_size = v;
    }
    if let Some(v) = args.generations {
        s.max_generations = v;
    }
    if let Some(v) = args.gamma {
        s.gamma = v;
    }
    if let Some(v) = args.rank_alpha {
        s.rank_alpha = v;
    }
    if let Some(v) = args.fitness_split {
        s.fitness_split = match v {
            SplitArg::Val1 => SplitTag::Val1,
            SplitArg::Val2 => SplitTag::Val2,
        };
    }
    s.raw_tuning_scores |= args.raw_tuning_scores;
    s.umda_from_prior |= args.umda_from_prior;
    if args.active_count_diversity {
        s.diversity_normalization = DiversityNormalization::ActiveCount;
    }
    s.validate()?;
    let exec = RayonExecutor::with_threads(args.threads)?;
    Ok((s, exec))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit<T: Serialize>(out: &OutArgs, report: &T, runs: &[RunReport], timings: &[RunTiming]) -> Result<()> {
    write_text(out.out.as_deref(), &serde_json::to_string_pretty(report)?)?;
    if let Some(p) = &out.csv {
        write_text(Some(p), &runs_to_csv(runs)?)?;
    }
    let timing_path = out.timing.clone().or_else(|| out.out.as_ref().map(|p| p.with_extension("timing.json")));
    if let Some(p) = timing_path {
        write_text(Some(&p), &serde_json::to_string_pretty(timings)?)?;
    }
    Ok(())
}

/// Runs found in a report file of any of the three shapes.
fn read_runs(path: &Path) -> Result<Vec<RunReport>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let runs = if value.get("runs").is_some() {
        serde_json::from_value::<GridReport>(value)?.runs
    } else if value.is_array() {
        serde_json::from_value::<Vec<RunReport>>(value)?
    } else {
        vec![serde_json::from_value::<RunReport>(value)?]
    };
    Ok(runs)
}

fn paired(a: &[RunReport], b: &[RunReport], by: PairBy) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ra in a {
        let Some(rb) = b.iter().find(|r| r.dataset == ra.dataset) else { continue };
        match by {
            PairBy::Dataset => {
                xs.push(ra.accuracy.mean);
                ys.push(rb.accuracy.mean);
            }
            PairBy::Fold => {
                for fa in &ra.folds {
                    if let Some(fb) = rb.folds.iter().find(|f| f.fold == fa.fold) {
                        xs.push(fa.test_accuracy);
                        ys.push(fb.test_accuracy);
                    }
                }
            }
        }
    }
    if xs.is_empty() {
        bail!("the two report sets share no dataset");
    }
    Ok((xs, ys))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Run { data, run, protocol, out, save_pools } => {
            let ds = load_dataset(&data)?;
            let (s, exec) = settings(&run)?;
            let spec = ProtocolSpec::parse(&protocol)?;
            let plan = harness::fold_plan(&ds, &s)?;
            let contexts = harness::build_contexts(&ds, &plan, spec.classifiers, &s, &exec)?;
            if let Some(dir) = save_pools {
                std::fs::create_dir_all(&dir)?;
                for ctx in &contexts {
                    save_pool(&ds, ctx, &dir)?;
                }
            }
            let (report, timing) = harness::run_protocol_on(&spec, &ds, &contexts, &s, &exec)?;
            emit(&out, &report, std::slice::from_ref(&report), &[timing])?;
        }
        Command::Grid { data, run, out } => {
            let ds = load_dataset(&data)?;
            let (s, exec) = settings(&run)?;
            let (grid, timings) = harness::run_grid(&ds, &s, &exec)?;
            emit(&out, &grid, &grid.runs, &timings)?;
        }
        Command::Sweep { data, run, sizes, out } => {
            let ds = load_dataset(&data)?;
            let (s, exec) = settings(&run)?;
            let (sweep, timings) = harness::pool_size_sweep(&ds, &sizes, &s, &exec)?;
            eprint!("{}", sweep.render());
            let runs: Vec<RunReport> = sweep.grids.iter().flat_map(|g| g.runs.clone()).collect();
            emit(&out, &sweep, &runs, &timings)?;
        }
        Command::Baseline { data, run, method, budget, classifiers, out } => {
            let ds = load_dataset(&data)?;
            let (mut s, exec) = settings(&run)?;
            if let Some(b) = budget {
                s.kappa_budget = b;
            }
            let method = match method {
                BaselineArg::Kappa => Baseline::Kappa,
                BaselineArg::Bagging => Baseline::Bagging,
            };
            let mode = match classifiers {
                ModeArg::M => ClassifierMode::M,
                ModeArg::P => ClassifierMode::P,
            };
            let (report, timing) = harness::run_baseline(method, mode, &ds, &s, &exec)?;
            emit(&out, &report, std::slice::from_ref(&report), &[timing])?;
        }
        Command::Stats { wilcoxon, pair_by, test } => {
            let a = read_runs(&wilcoxon[0])?;
            let b = read_runs(&wilcoxon[1])?;
            let (xs, ys) = paired(&a, &b, pair_by)?;
            let r: WilcoxonResult = match test {
                TestArg::Auto => wilcoxon_signed_rank(&xs, &ys)?,
                TestArg::Exact => wilcoxon_exact(&xs, &ys)?,
                TestArg::Normal => wilcoxon_normal(&xs, &ys, true)?,
            };
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::Report { table6, with, against, tie_epsilon, timing, ratio } => {
            if !table6 && timing.is_empty() {
                bail!("nothing to report: pass --table6 and/or --timing");
            }
            if table6 {
                let mut table = ComparisonTable::reference();
                let mut added: Vec<(String, Vec<(String, f64, f64)>)> = Vec::new();
                for p in &with {
                    for r in read_runs(p)? {
                        let entry = (r.dataset.clone(), r.accuracy.median * 100.0, r.ensemble_size.mean);
                        match added.iter_mut().find(|(m, _)| *m == r.method) {
                            Some((_, v)) => v.push(entry),
                            None => added.push((r.method.clone(), vec![entry])),
                        }
                    }
                }
                for (method, values) in &added {
                    let label = if table.method_index(method).is_some() { format!("{method}*") } else { method.clone() };
                    table.set_method(&label, values);
                }
                print!("{}", table.render(tie_epsilon));
                let complete = table.complete_rows();
                println!("\nWilcoxon signed-rank p-values against {against} ({} datasets):", complete.datasets.len());
                for (m, p) in complete.wilcoxon_against(&against) {
                    println!("  {m:<12} {p:.4}");
                }
            }
            if !timing.is_empty() {
                let mut all: Vec<RunTiming> = Vec::new();
                for p in &timing {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    all.extend(serde_json::from_str::<Vec<RunTiming>>(&text)?);
                }
                let (a, b) = ratio.split_once('/').context("--ratio must look like A/B")?;
                print!("{}", render_timing(&all, a, b));
            }
        }
        Command::ExportFolds { data, folds, seed, out } => {
            let ds = load_dataset(&data)?;
            let plan = cife_core::dataset::make_folds(&ds, folds, seed)?;
            for w in &plan.warnings {
                log::warn!("{w}");
            }
            write_text(out.as_deref(), &fold_plan_json(&plan)?)?;
        }
    }
    Ok(())
}

fn save_pool(ds: &Dataset, ctx: &FoldContext, dir: &Path) -> Result<()> {
    let file = PoolFile {
        format_version: POOL_FORMAT_VERSION,
        dataset: ds.name().to_string(),
        fold: ctx.fold,
        pool: ctx.pool.clone(),
        predictions: ctx.predictions.clone(),
    };
    let path = dir.join(format!("{}-{:?}-fold{}.json", ds.name(), ctx.mode, ctx.fold));
    poolfile::save(&file, &path)?;
    Ok(())
}
