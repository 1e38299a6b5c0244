//! Config-driven experiment runners with deterministic seeding and CSV
//! output.
//!
//! Every cell `(n, k, observable)` draws from a seed derived from the base
//! seed and the cell key, and Monte-Carlo samples inside a cell use the
//! per-sample substreams of [`crate::rng`]. Cells run in sorted order and
//! rows are written in that order, so output bytes depend only on the
//! config and seed. Floats are written in shortest round-trip form.

pub mod config;
mod operators;
pub mod spsa;
mod verify;
mod sampling;

use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentKind, InputState, Suite};
pub use operators::{evolved_k_norm, run_cknorm, run_pauli_dist};
pub use sampling::{prepare_input, run_grad_variance, run_learn, run_variance};
pub use verify::{random_bit_tuples, run_verify};

use crate::error::Result;
use crate::haar::DesignRow;

/// Seed for a cell, derived from the base seed and the cell key.
pub fn cell_seed(seed: u64, key: &[u64]) -> u64 {
    key.iter().fold(seed, |s, &k| crate::rng::substream(s, k).gen())
}

/// Rows with a fixed column order and an explicit header, so empty outputs
/// still carry the header line.
pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub n: usize,
    pub k: usize,
    pub observable: String,
    pub statistic: String,
    pub value: f64,
    pub se: f64,
    pub samples: usize,
    pub seed: u64,
}

impl CsvRow for ResultRecord {
    const HEADER: &'static [&'static str] =
        &["experiment_id", "n", "k", "observable", "statistic", "value", "se", "samples", "seed"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnRow {
    pub experiment_id: String,
    pub n: usize,
    pub k: usize,
    pub observable: String,
    pub seed: u64,
    pub iteration: usize,
    pub objective: f64,
    pub infidelity: f64,
}

impl CsvRow for LearnRow {
    const HEADER: &'static [&'static str] =
        &["experiment_id", "n", "k", "observable", "seed", "iteration", "objective", "infidelity"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliRow {
    pub experiment_id: String,
    pub n: usize,
    pub k: usize,
    pub observable: String,
    pub theta_sample_id: usize,
    pub pauli_string: String,
    pub coefficient: f64,
    pub probability: f64,
}

impl CsvRow for PauliRow {
    const HEADER: &'static [&'static str] = &[
        "experiment_id",
        "n",
        "k",
        "observable",
        "theta_sample_id",
        "pauli_string",
        "coefficient",
        "probability",
    ];
}

/// Boxplot quantiles of one queried Pauli across parameter samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliSummaryRow {
    pub experiment_id: String,
    pub n: usize,
    pub k: usize,
    pub observable: String,
    pub pauli_string: String,
    pub samples: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl CsvRow for PauliSummaryRow {
    const HEADER: &'static [&'static str] = &[
        "experiment_id",
        "n",
        "k",
        "observable",
        "pauli_string",
        "samples",
        "min",
        "q1",
        "median",
        "q3",
        "max",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub test_id: String,
    pub n: usize,
    pub k: usize,
    pub exact: f64,
    pub mc_estimate: f64,
    pub se: f64,
    pub pass: bool,
}

impl CsvRow for AnalyticRow {
    const HEADER: &'static [&'static str] = &["test_id", "n", "k", "exact", "mc_estimate", "se", "pass"];
}

impl CsvRow for DesignRow {
    const HEADER: &'static [&'static str] =
        &["family", "width", "depth", "moment", "test_id", "analytic", "estimate", "se", "pass"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub test_id: String,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub pass: bool,
}

impl CsvRow for NormRow {
    const HEADER: &'static [&'static str] = &["test_id", "check", "lhs", "rhs", "se", "pass"];
}

/// Result of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Records(Vec<ResultRecord>),
    Learn(Vec<LearnRow>),
    Pauli { rows: Vec<PauliRow>, summary: Vec<PauliSummaryRow> },
    Analytic(Vec<AnalyticRow>),
    Design(Vec<DesignRow>),
    Norm(Vec<NormRow>),
}

impl Output {
    /// Failing rows of a verification suite (0 for other outputs).
    pub fn failures(&self) -> usize {
        match self {
            Output::Analytic(r) => r.iter().filter(|x| !x.pass).count(),
            Output::Design(r) => r.iter().filter(|x| !x.pass).count(),
            Output::Norm(r) => r.iter().filter(|x| !x.pass).count(),
            _ => 0,
        }
    }

    /// Writes the main CSV to `path`; `pauli-dist` also writes its
    /// quantile table next to it (see [`summary_path`]).
    pub fn write(&self, path: &Path) -> Result<()> {
        match self {
            Output::Records(r) => write_csv(path, r),
            Output::Learn(r) => write_csv(path, r),
            Output::Pauli { rows, summary } => {
                write_csv(path, rows)?;
                write_csv(&summary_path(path), summary)
            }
            Output::Analytic(r) => write_csv(path, r),
            Output::Design(r) => write_csv(path, r),
            Output::Norm(r) => write_csv(path, r),
        }
    }
}

/// `out.csv` → `out.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

pub fn to_csv_bytes<T: CsvRow>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))
}

pub fn write_csv<T: CsvRow>(path: &Path, rows: &[T]) -> Result<()> {
    std::fs::write(path, to_csv_bytes(rows)?)?;
    Ok(())
}

/// Runs the configured experiment. `suite` overrides the config's suite.
pub fn run(cfg: &ExperimentConfig, suite: Option<Suite>) -> Result<Output> {
    match cfg.experiment {
        ExperimentKind::Variance => run_variance(cfg).map(Output::Records),
        ExperimentKind::GradVariance => run_grad_variance(cfg).map(Output::Records),
        ExperimentKind::Learn => run_learn(cfg).map(Output::Learn),
        ExperimentKind::Cknorm => run_cknorm(cfg).map(Output::Records),
        ExperimentKind::PauliDist => run_pauli_dist(cfg).map(|(rows, summary)| Output::Pauli { rows, summary }),
        ExperimentKind::Verify => {
            let suite = suite.or(cfg.suite).ok_or_else(|| crate::Error::Config {
                field: "suite".into(),
                msg: "verify needs a suite".into(),
            })?;
            run_verify(cfg, suite)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_when_empty() {
        let b = to_csv_bytes::<ResultRecord>(&[]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "experiment_id,n,k,observable,statistic,value,se,samples,seed\n");
    }

    #[test]
    fn float_format_round_trips() {
        let r = NormRow { test_id: "t".into(), check: "c".into(), lhs: 0.1, rhs: 1e-300, se: 2.5e20, pass: true };
        let s = String::from_utf8(to_csv_bytes(&[r]).unwrap()).unwrap();
        let line = s.lines().nth(1).unwrap();
        let parts: Vec<&str> = line.split(',').collect();
        assert_eq!(parts[2].parse::<f64>().unwrap(), 0.1);
        assert_eq!(parts[3].parse::<f64>().unwrap(), 1e-300);
        assert_eq!(parts[5], "true");
    }

    #[test]
    fn summary_sibling() {
        assert_eq!(summary_path(Path::new("/a/b/out.csv")), PathBuf::from("/a/b/out.summary.csv"));
    }
}
