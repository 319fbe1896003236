//! Delimited-text datasets and fold exports.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use cife_core::dataset::{Dataset, FoldPlan};
use cife_core::rng::rng_from_seed;
use cife_core::Matrix;
use rand::Rng;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed CSV: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("{path}: line {line} has {found} fields, expected {expected}")]
    Ragged { path: PathBuf, line: usize, found: usize, expected: usize },
    #[error("{path}: line {line}, column {column}: cannot parse {value:?} as a number")]
    Parse { path: PathBuf, line: usize, column: usize, value: String },
    #[error("{path}: label column {column} not found")]
    LabelColumn { path: PathBuf, column: String },
    #[error("{path}: {source}")]
    Dataset { path: PathBuf, source: cife_core::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// `last`, a zero-based column index, or a header name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// A first row whose feature fields are not all numeric is a header.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub label: LabelColumn,
    pub header: HeaderMode,
}

fn is_number(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok_and(f64::is_finite)
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset, LoadError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    let name = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    parse_csv(&name, path, text.as_bytes(), opts)
}

/// Parses CSV text; `path` is only used in error messages.
pub fn parse_csv(name: &str, path: &Path, input: &[u8], opts: &CsvOptions) -> Result<Dataset, LoadError> {
    let p = || path.to_path_buf();
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|source| LoadError::Csv { path: p(), source })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(records.len() + 1, |pos| pos.line() as usize);
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(LoadError::Empty { path: p() });
    };
    let width = first.len();
    let label_at = |header: Option<&csv::StringRecord>| -> Result<usize, LoadError> {
        let idx = match &opts.label {
            LabelColumn::Last => width.checked_sub(1),
            LabelColumn::Index(i) => Some(*i).filter(|&i| i < width),
            LabelColumn::Name(n) => header.and_then(|h| h.iter().position(|f| f == n)),
        };
        idx.ok_or_else(|| LoadError::LabelColumn {
            path: p(),
            column: match &opts.label {
                LabelColumn::Last => "last".into(),
                LabelColumn::Index(i) => i.to_string(),
                LabelColumn::Name(n) => n.clone(),
            },
        })
    };
    let has_header = match opts.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => {
            let provisional = match &opts.label {
                LabelColumn::Name(_) => None,
                _ => Some(label_at(None)?),
            };
            matches!(opts.label, LabelColumn::Name(_))
                || first.iter().enumerate().any(|(c, f)| Some(c) != provisional && !is_number(f))
        }
    };
    let label = label_at(if has_header { Some(first) } else { None })?;
    let body = if has_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(LoadError::Empty { path: p() });
    }
    let mut data = Vec::with_capacity(body.len() * (width - 1));
    let mut raw_labels = Vec::with_capacity(body.len());
    for (line, rec) in body {
        if rec.len() != width {
            return Err(LoadError::Ragged { path: p(), line: *line, found: rec.len(), expected: width });
        }
        for (c, field) in rec.iter().enumerate() {
            if c == label {
                raw_labels.push(field.to_string());
            } else {
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => data.push(v),
                    _ => {
                        return Err(LoadError::Parse { path: p(), line: *line, column: c, value: field.to_string() });
                    }
                }
            }
        }
    }
    let features = Matrix::new(body.len(), width - 1, data).map_err(|source| LoadError::Dataset { path: p(), source })?;
    Dataset::from_raw_labels(name, features, &raw_labels).map_err(|source| LoadError::Dataset { path: p(), source })
}

/// Writes the fold partition and role assignment as JSON.
pub fn fold_plan_json(plan: &FoldPlan) -> serde_json::Result<String> {
    serde_json::to_string_pretty(plan)
}

/// Two Gaussian blobs in the plane, centred at (±3, ±3) with unit variance;
/// `n` points alternate between the classes.
pub fn two_blobs(n: usize, seed: u64) -> Dataset {
    let mut rng = rng_from_seed(seed);
    let mut normal = move || {
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let centre = if class == 0 { -3.0 } else { 3.0 };
        data.push(centre + normal());
        data.push(centre + normal());
        labels.push(class);
    }
    let features = Matrix::new(n, 2, data).expect("shape matches data");
    Dataset::new("two-blobs", features, labels, vec!["a".into(), "b".into()]).expect("both classes present")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, opts: &CsvOptions) -> Result<Dataset, LoadError> {
        parse_csv("t", Path::new("t.csv"), text.as_bytes(), opts)
    }

    #[test]
    fn header_detection_and_label_choice() {
        let ds = parse("x,y,class\n1,2,a\n3,4,b\n", &CsvOptions::default()).unwrap();
        assert_eq!((ds.len(), ds.n_attributes(), ds.class_count()), (2, 2, 2));
        let ds = parse("1,2,a\n3,4,b\n", &CsvOptions::default()).unwrap();
        assert_eq!(ds.len(), 2);
        let opts = CsvOptions { label: LabelColumn::Index(0), ..Default::default() };
        let ds = parse("a,1,2\nb,3,4\n", &opts).unwrap();
        assert_eq!(ds.features().row(1), &[3.0, 4.0]);
        let opts = CsvOptions { label: LabelColumn::Name("class".into()), ..Default::default() };
        let ds = parse("class,x\nu,1\nv,2\n", &opts).unwrap();
        assert_eq!(ds.class_names(), &["u".to_string(), "v".to_string()]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse("", &CsvOptions::default()), Err(LoadError::Empty { .. })));
        assert!(matches!(parse("x,y\n", &CsvOptions::default()), Err(LoadError::Empty { .. })));
        assert!(matches!(parse("1,2,a\n3,b\n", &CsvOptions::default()), Err(LoadError::Ragged { line: 2, .. })));
        let opts = CsvOptions { header: HeaderMode::Absent, ..Default::default() };
        assert!(matches!(parse("1,?,a\n", &opts), Err(LoadError::Parse { line: 1, column: 1, .. })));
        let opts = CsvOptions { label: LabelColumn::Index(7), ..Default::default() };
        assert!(matches!(parse("1,2\n", &opts), Err(LoadError::LabelColumn { .. })));
    }

    #[test]
    fn blobs_are_balanced_and_deterministic() {
        let a = two_blobs(300, 1);
        assert_eq!(a.class_counts(), vec![150, 150]);
        assert_eq!(a, two_blobs(300, 1));
    }
}
