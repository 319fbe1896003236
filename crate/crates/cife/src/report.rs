//! Versioned JSON run reports, CSV flattening and text tables.

use std::fmt::Write as _;

use cife_core::evolve::Termination;
use cife_core::stats::{wilcoxon_normal, win_tie_loss, WinTieLoss};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Published accuracies (percent) and ensemble sizes of the reference methods.
pub const REFERENCE_TABLE_CSV: &str = include_str!("../data/table6_reference.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_accuracy: f64,
    pub ensemble_size: usize,
    pub generations_run: usize,
    pub best_fitness: Option<f64>,
    pub initial_best_fitness: Option<f64>,
    pub termination: Option<Termination>,
    /// Digest of the fold's label matrices, hex.
    pub pool_checksum: String,
    /// Selected ensemble as a hex bit-string.
    pub mask: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, median: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, median: median(values), std }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    /// Protocol name such as `MTD-UMDA`, or a baseline name.
    pub method: String,
    pub dataset: String,
    pub pool_size: usize,
    pub candidates: usize,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub accuracy: Aggregate,
    pub ensemble_size: Aggregate,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(method: String, dataset: String, pool_size: usize, candidates: usize, k: usize, seed: u64, folds: Vec<FoldResult>) -> Self {
        let acc: Vec<f64> = folds.iter().map(|f| f.test_accuracy).collect();
        let sizes: Vec<f64> = folds.iter().map(|f| f.ensemble_size as f64).collect();
        Self {
            format_version: FORMAT_VERSION,
            method,
            dataset,
            pool_size,
            candidates,
            k,
            seed,
            accuracy: Aggregate::of(&acc),
            ensemble_size: Aggregate::of(&sizes),
            folds,
        }
    }

    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.test_accuracy).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFailure {
    pub method: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub format_version: u32,
    pub dataset: String,
    pub pool_size: usize,
    pub seed: u64,
    pub runs: Vec<RunReport>,
    pub failures: Vec<GridFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub format_version: u32,
    pub dataset: String,
    pub seed: u64,
    pub sizes: Vec<usize>,
    /// One grid per pool size, in `sizes` order.
    pub grids: Vec<GridReport>,
    /// Median over the grid's mean protocol accuracies, per size.
    pub medians: Vec<f64>,
}

impl SweepReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<16}", "dataset");
        for s in &self.sizes {
            let _ = write!(out, "{:>10}", format!("|C|={s}"));
        }
        let _ = write!(out, "\n{:<16}", self.dataset);
        for m in &self.medians {
            let _ = write!(out, "{:>10.2}", m * 100.0);
        }
        out.push('\n');
        out
    }
}

/// Wall-clock seconds of one run, kept apart from the deterministic report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub method: String,
    pub dataset: String,
    /// Seconds to build each fold's pool and label matrices (shared across
    /// protocols of one pool type).
    pub pool_seconds: Vec<f64>,
    /// Seconds of initialization, search and evaluation per fold.
    pub fold_seconds: Vec<f64>,
    pub total_seconds: f64,
}

/// Text table of total seconds per dataset for two methods and their ratio.
pub fn render_timing(timings: &[RunTiming], a: &str, b: &str) -> String {
    let mut datasets: Vec<&str> = timings.iter().map(|t| t.dataset.as_str()).collect();
    datasets.dedup();
    let mut out = format!("{:<16}{:>12}{:>12}{:>10}\n", "dataset", a, b, format!("{a}/{b}"));
    let mut ratios = Vec::new();
    for d in datasets {
        let secs = |m: &str| timings.iter().find(|t| t.dataset == d && t.method == m).map(|t| t.total_seconds);
        let (sa, sb) = (secs(a), secs(b));
        let fmt = |s: Option<f64>| s.map_or_else(|| "-".into(), |v| format!("{v:.1}"));
        let ratio = match (sa, sb) {
            (Some(x), Some(y)) if y > 0.0 => {
                ratios.push(x / y);
                format!("{:.2}", x / y)
            }
            _ => "-".into(),
        };
        let _ = writeln!(out, "{:<16}{:>12}{:>12}{:>10}", d, fmt(sa), fmt(sb), ratio);
    }
    if !ratios.is_empty() {
        let _ = writeln!(out, "{:<16}{:>12}{:>12}{:>10.2}", "average", "", "", ratios.iter().sum::<f64>() / ratios.len() as f64);
    }
    out
}

/// One line per fold of every run.
pub fn runs_to_csv(runs: &[RunReport]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "dataset",
        "pool_size",
        "seed",
        "fold",
        "test_accuracy",
        "ensemble_size",
        "generations_run",
        "best_fitness",
        "pool_checksum",
    ])?;
    for r in runs {
        for f in &r.folds {
            w.write_record([
                r.method.clone(),
                r.dataset.clone(),
                r.pool_size.to_string(),
                r.seed.to_string(),
                f.fold.to_string(),
                f.test_accuracy.to_string(),
                f.ensemble_size.to_string(),
                f.generations_run.to_string(),
                f.best_fitness.map_or_else(String::new, |v| v.to_string()),
                f.pool_checksum.clone(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Accuracy (percent) and ensemble size per dataset for several methods.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `accuracy[method][dataset]`, percent.
    pub accuracy: Vec<Vec<f64>>,
    pub size: Vec<Vec<f64>>,
}

impl ComparisonTable {
    /// Parses `dataset,<m>,<m>_size,...` CSV.
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| e.to_string())?.clone();
        let methods: Vec<String> = header.iter().skip(1).step_by(2).map(str::to_string).collect();
        let mut t = Self { accuracy: vec![Vec::new(); methods.len()], size: vec![Vec::new(); methods.len()], methods, datasets: Vec::new() };
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            t.datasets.push(rec[0].to_string());
            for m in 0..t.methods.len() {
                let num = |i: usize| rec.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or_else(|| format!("bad value in row {}", &rec[0]));
                t.accuracy[m].push(num(1 + 2 * m)?);
                t.size[m].push(num(2 + 2 * m)?);
            }
        }
        Ok(t)
    }

    pub fn reference() -> Self {
        Self::from_csv(REFERENCE_TABLE_CSV).expect("bundled reference table parses")
    }

    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.eq_ignore_ascii_case(name))
    }

    /// Adds or replaces a method column; datasets missing from `values` get NaN.
    pub fn set_method(&mut self, name: &str, values: &[(String, f64, f64)]) {
        let col_acc: Vec<f64> = self.datasets.iter().map(|d| values.iter().find(|v| v.0.eq_ignore_ascii_case(d)).map_or(f64::NAN, |v| v.1)).collect();
        let col_size: Vec<f64> = self.datasets.iter().map(|d| values.iter().find(|v| v.0.eq_ignore_ascii_case(d)).map_or(f64::NAN, |v| v.2)).collect();
        match self.method_index(name) {
            Some(i) => {
                self.accuracy[i] = col_acc;
                self.size[i] = col_size;
            }
            None => {
                self.methods.push(name.to_string());
                self.accuracy.push(col_acc);
                self.size.push(col_size);
            }
        }
    }

    /// Keeps only datasets where every method has a value.
    pub fn complete_rows(&self) -> Self {
        let keep: Vec<usize> = (0..self.datasets.len()).filter(|&d| self.accuracy.iter().all(|col| col[d].is_finite())).collect();
        let pick = |cols: &Vec<Vec<f64>>| cols.iter().map(|c| keep.iter().map(|&d| c[d]).collect()).collect();
        Self {
            methods: self.methods.clone(),
            datasets: keep.iter().map(|&d| self.datasets[d].clone()).collect(),
            accuracy: pick(&self.accuracy),
            size: pick(&self.size),
        }
    }

    pub fn win_tie_loss(&self, tie_epsilon: f64) -> Vec<WinTieLoss> {
        win_tie_loss(&self.accuracy, tie_epsilon).expect("columns share the dataset count")
    }

    /// Two-sided p-values of `method` against every other method, by normal
    /// approximation without continuity correction.
    pub fn wilcoxon_against(&self, method: &str) -> Vec<(String, f64)> {
        let Some(m) = self.method_index(method) else { return Vec::new() };
        (0..self.methods.len())
            .filter(|&o| o != m)
            .map(|o| {
                let p = wilcoxon_normal(&self.accuracy[m], &self.accuracy[o], false).map_or(f64::NAN, |r| r.p_value);
                (self.methods[o].clone(), p)
            })
            .collect()
    }

    pub fn render(&self, tie_epsilon: f64) -> String {
        let mut out = format!("{:<16}", "dataset");
        for m in &self.methods {
            let _ = write!(out, "{:>10}{:>5}", m, "#");
        }
        out.push('\n');
        for (d, name) in self.datasets.iter().enumerate() {
            let _ = write!(out, "{name:<16}");
            for m in 0..self.methods.len() {
                let _ = write!(out, "{:>10.1}{:>5.0}", self.accuracy[m][d], self.size[m][d]);
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<16}", "average #");
        for col in &self.size {
            let _ = write!(out, "{:>10}{:>5.0}", "", col.iter().sum::<f64>() / col.len().max(1) as f64);
        }
        out.push('\n');
        let _ = write!(out, "{:<16}", "win/tie/loss");
        for w in self.complete_rows().win_tie_loss(tie_epsilon) {
            let _ = write!(out, "{:>10}{:>5}", format!("{}/{}/{}", w.win, w.tie, w.loss), "");
        }
        out.push('\n');
        out
    }
}
