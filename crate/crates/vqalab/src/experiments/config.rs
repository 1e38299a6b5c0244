//! JSON experiment configuration, validated on load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuits::{Ansatz, AnsatzKind};
use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::pauli::MAX_ENUMERATION;

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Variance,
    GradVariance,
    Learn,
    Cknorm,
    PauliDist,
    Verify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Variance => "variance",
            ExperimentKind::GradVariance => "grad-variance",
            ExperimentKind::Learn => "learn",
            ExperimentKind::Cknorm => "cknorm",
            ExperimentKind::PauliDist => "pauli-dist",
            ExperimentKind::Verify => "verify",
        }
    }
}

/// A size that may depend on the cell: a literal, `"log"` for `⌊log₂ n⌋`
/// or (for depths) `"k"` for the subcircuit width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Size {
    Fixed(usize),
    Rule(SizeRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeRule {
    Log,
    K,
}

impl Size {
    /// Value at qubit count `n` and subcircuit width `k`.
    pub fn resolve(self, n: usize, k: usize) -> usize {
        match self {
            Size::Fixed(v) => v,
            Size::Rule(SizeRule::Log) => n.max(1).ilog2() as usize,
            Size::Rule(SizeRule::K) => k,
        }
    }
}

impl std::str::FromStr for Size {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => return Ok(Size::Rule(SizeRule::Log)),
            "k" => return Ok(Size::Rule(SizeRule::K)),
            _ => {}
        }
        s.parse().map(Size::Fixed).map_err(|_| Error::Parse(format!("bad size '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizeList {
    One(Size),
    Many(Vec<Size>),
}

impl SizeList {
    pub fn items(&self) -> Vec<Size> {
        match self {
            SizeList::One(s) => vec![*s],
            SizeList::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    /// Subcircuit width(s) for MPS; ignored by HEA and QCNN.
    #[serde(default)]
    pub k: Option<SizeList>,
    /// Brickwork depth of each subcircuit (MPS) or of the whole circuit.
    pub depth: Size,
}

impl AnsatzSpec {
    /// Widths to sweep at a given `n` (a single entry for HEA/QCNN).
    pub fn widths(&self, n: usize) -> Vec<usize> {
        match (self.kind, &self.k) {
            (AnsatzKind::Mps, Some(list)) => list.items().into_iter().map(|s| s.resolve(n, n)).collect(),
            _ => vec![n],
        }
    }

    pub fn build(&self, n: usize, k: usize) -> Result<Ansatz> {
        let d = self.depth.resolve(n, k);
        match self.kind {
            AnsatzKind::Mps => Ansatz::mps(n, k, d),
            AnsatzKind::Hea => Ansatz::hea(n, d),
            AnsatzKind::Qcnn => Ansatz::qcnn(n, d),
        }
    }
}

/// `zero`, `product:θ₁,…,θₙ` (one polar angle per qubit, or one shared
/// angle) or `random-hea:<depth>` with `<depth>` a number or `log`.
#[derive(Debug, Clone, PartialEq)]
pub enum InputState {
    Zero,
    Product(Vec<f64>),
    RandomHea(Size),
}

impl std::str::FromStr for InputState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "zero" => Ok(InputState::Zero),
            Some(("product", v)) => v
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad angle '{x}'"))))
                .collect::<Result<Vec<_>>>()
                .map(InputState::Product),
            Some(("random-hea", d)) => Ok(InputState::RandomHea(d.parse()?)),
            _ => Err(Error::Parse(format!("unknown input state '{s}'"))),
        }
    }
}

impl std::fmt::Display for InputState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputState::Zero => write!(f, "zero"),
            InputState::Product(a) => {
                let parts: Vec<String> = a.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "product:{}", parts.join(","))
            }
            InputState::RandomHea(Size::Fixed(d)) => write!(f, "random-hea:{d}"),
            InputState::RandomHea(Size::Rule(SizeRule::Log)) => write!(f, "random-hea:log"),
            InputState::RandomHea(Size::Rule(SizeRule::K)) => write!(f, "random-hea:k"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
pub enum GainSchedule {
    Constant,
    /// `a_j = a/(j+1+A)^α`, `c_j = c/(j+1)^γ` for iteration `j` from 0.
    Decaying {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default)]
        stability: f64,
    },
}

fn default_alpha() -> f64 {
    0.602
}

fn default_gamma() -> f64 {
    0.101
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaSettings {
    #[serde(default = "default_gain")]
    pub a: f64,
    #[serde(default = "default_gain")]
    pub c: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_init_range")]
    pub init_range: [f64; 2],
    #[serde(default = "default_schedule")]
    pub schedule: GainSchedule,
}

fn default_gain() -> f64 {
    0.4
}

fn default_iterations() -> usize {
    300
}

fn default_init_range() -> [f64; 2] {
    [0.0, std::f64::consts::FRAC_PI_2]
}

fn default_schedule() -> GainSchedule {
    GainSchedule::Constant
}

impl Default for SpsaSettings {
    fn default() -> Self {
        SpsaSettings {
            a: default_gain(),
            c: default_gain(),
            iterations: default_iterations(),
            init_range: default_init_range(),
            schedule: default_schedule(),
        }
    }
}

/// Pauli queries for `pauli-dist`: `"z"` (every `Z_i`), `"all"` (full
/// enumeration) or explicit strings such as `"IZXY"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Queries {
    Set(QuerySet),
    List(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuerySet {
    Z,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalPath {
    Auto,
    Dense,
    Tn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Analytic,
    Design,
    Norm,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Analytic => "analytic",
            Suite::Design => "design",
            Suite::Norm => "norm",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Suite::Analytic),
            "design" => Ok(Suite::Design),
            "norm" => Ok(Suite::Norm),
            _ => Err(cfg_err("suite", format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuKind {
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuCase {
    pub n: usize,
    pub k: usize,
    pub kind: MuKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
pub enum FamilySpec {
    Hea { width: usize, depth: usize },
    Haar { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default = "default_cases")]
    pub cases: Vec<MuCase>,
    /// Random bit-string tuples per global case.
    #[serde(default = "default_tuples")]
    pub tuples: usize,
    #[serde(default = "default_families")]
    pub families: Vec<FamilySpec>,
    #[serde(default = "default_moments")]
    pub moments: Vec<u8>,
    /// Random Hermitian tuples per design row group.
    #[serde(default = "default_design_tuples")]
    pub design_tuples: usize,
    /// Random Hermitian pairs for the norm suite.
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_norm_n")]
    pub norm_n: usize,
}

fn default_cases() -> Vec<MuCase> {
    let g = |n, k| MuCase { n, k, kind: MuKind::Global };
    let l = |n, k| MuCase { n, k, kind: MuKind::Local };
    vec![g(3, 2), g(4, 2), g(5, 2), l(4, 2), l(5, 2), l(6, 3)]
}

fn default_tuples() -> usize {
    20
}

fn default_families() -> Vec<FamilySpec> {
    vec![FamilySpec::Hea { width: 2, depth: 8 }, FamilySpec::Haar { dim: 2 }, FamilySpec::Haar { dim: 4 }]
}

fn default_moments() -> Vec<u8> {
    vec![1, 2]
}

fn default_design_tuples() -> usize {
    3
}

fn default_pairs() -> usize {
    50
}

fn default_norm_n() -> usize {
    4
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            cases: default_cases(),
            tuples: default_tuples(),
            families: default_families(),
            moments: default_moments(),
            design_tuples: default_design_tuples(),
            pairs: default_pairs(),
            norm_n: default_norm_n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Label written to every row; defaults to `<experiment>-<ansatz kind>`.
    #[serde(default)]
    pub id: Option<String>,
    pub ansatz: AnsatzSpec,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub observables: Vec<String>,
    #[serde(default = "default_input_state")]
    pub input_state: String,
    /// Input states averaged over (only meaningful for `random-hea`).
    #[serde(default = "default_one")]
    pub input_states: usize,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Independent optimizer runs per cell for `learn`.
    #[serde(default = "default_one")]
    pub seeds: usize,
    #[serde(default)]
    pub spsa: SpsaSettings,
    /// Parameter indices to differentiate; all when absent.
    #[serde(default)]
    pub grad_params: Option<Vec<usize>>,
    #[serde(default = "default_queries")]
    pub queries: Queries,
    #[serde(default = "default_path")]
    pub path: EvalPath,
    #[serde(default)]
    pub suite: Option<Suite>,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_input_state() -> String {
    "zero".into()
}

fn default_one() -> usize {
    1
}

fn default_queries() -> Queries {
    Queries::Set(QuerySet::Z)
}

fn default_path() -> EvalPath {
    EvalPath::Auto
}

/// Largest `n` accepted by dense evaluation paths.
pub const MAX_DENSE_N: usize = 12;
/// Largest `n` accepted by tensor-network paths.
pub const MAX_TN_N: usize = 16;
/// Largest `n` for exhaustive Pauli queries.
pub const MAX_ALL_QUERIES_N: usize = 6;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| cfg_err("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg_err("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn experiment_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            let kind = match self.ansatz.kind {
                AnsatzKind::Mps => "mps",
                AnsatzKind::Hea => "hea",
                AnsatzKind::Qcnn => "qcnn",
            };
            format!("{}-{kind}", self.experiment.name())
        })
    }

    /// Observables at size `n`; the qubit alias `last` resolves to `n`.
    pub fn observables_at(&self, n: usize) -> Result<Vec<Observable>> {
        self.observables
            .iter()
            .map(|s| {
                let s = match s.split_once(':') {
                    Some((head, "last")) => format!("{head}:{n}"),
                    _ => s.clone(),
                };
                s.parse::<Observable>().map_err(|e| cfg_err("observables", e.to_string()))
            })
            .collect()
    }

    pub fn parsed_input_state(&self) -> Result<InputState> {
        self.input_state.parse().map_err(|e: Error| cfg_err("input_state", e.to_string()))
    }

    /// Field-level checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        let verify = self.experiment == ExperimentKind::Verify;
        if !verify {
            if self.n.is_empty() {
                return Err(cfg_err("n", "at least one qubit count is required"));
            }
            if self.observables.is_empty() {
                return Err(cfg_err("observables", "at least one observable is required"));
            }
        }
        let input = self.parsed_input_state()?;
        if self.ansatz.kind == AnsatzKind::Mps && self.ansatz.k.is_none() {
            return Err(cfg_err("ansatz.k", "MPS ansatz needs a subcircuit width"));
        }
        if self.ansatz.k.iter().flat_map(|l| l.items()).any(|s| s == Size::Rule(SizeRule::K)) {
            return Err(cfg_err("ansatz.k", "\"k\" is only valid for depths"));
        }
        if input == InputState::RandomHea(Size::Rule(SizeRule::K)) {
            return Err(cfg_err("input_state", "\"k\" is only valid for subcircuit depths"));
        }
        let operator_path = matches!(self.experiment, ExperimentKind::Cknorm | ExperimentKind::PauliDist);
        for &n in &self.n {
            if !(2..=MAX_TN_N).contains(&n) || (!operator_path && n > MAX_DENSE_N) {
                let cap = if operator_path { MAX_TN_N } else { MAX_DENSE_N };
                return Err(cfg_err("n", format!("{n} outside 2..={cap}")));
            }
            for k in self.ansatz.widths(n) {
                self.ansatz.build(n, k).map_err(|e| cfg_err("ansatz", e.to_string()))?;
            }
            for w in &self.observables_at(n)? {
                w.validate(n).map_err(|e| cfg_err("observables", e.to_string()))?;
                if operator_path {
                    if self.path == EvalPath::Tn && w.product_factors(n).is_none() {
                        return Err(cfg_err("path", format!("{w} has no product form for the tensor network")));
                    }
                    if !self.use_tn(w) && n > MAX_ENUMERATION {
                        return Err(cfg_err(
                            "n",
                            format!("{w} takes the dense path, capped at n={MAX_ENUMERATION}, got {n}"),
                        ));
                    }
                }
            }
            if let InputState::Product(a) = &input {
                if a.len() != 1 && a.len() != n {
                    return Err(cfg_err("input_state", format!("{} angles for n={n}", a.len())));
                }
            }
        }
        if self.input_states == 0 {
            return Err(cfg_err("input_states", "must be >= 1"));
        }
        if self.input_states > 1 && !matches!(input, InputState::RandomHea(_)) {
            return Err(cfg_err("input_states", "several input states need random-hea"));
        }
        if self.experiment == ExperimentKind::Learn {
            if self.seeds == 0 {
                return Err(cfg_err("seeds", "must be >= 1"));
            }
            let s = &self.spsa;
            if !(s.a > 0.0 && s.c > 0.0) {
                return Err(cfg_err("spsa", "gains a and c must be positive"));
            }
            let [lo, hi] = s.init_range;
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(cfg_err("spsa.init_range", "bounds must be finite with low <= high"));
            }
        }
        if self.experiment == ExperimentKind::GradVariance {
            if let Some(ix) = &self.grad_params {
                for &n in &self.n {
                    for k in self.ansatz.widths(n) {
                        let np = self.ansatz.build(n, k)?.num_params();
                        if let Some(&bad) = ix.iter().find(|&&j| j >= np) {
                            return Err(cfg_err("grad_params", format!("index {bad} >= {np} parameters")));
                        }
                    }
                }
            }
        }
        if self.experiment == ExperimentKind::PauliDist {
            match &self.queries {
                Queries::Set(QuerySet::All) => {
                    if let Some(&n) = self.n.iter().find(|&&n| n > MAX_ALL_QUERIES_N) {
                        return Err(cfg_err("queries", format!("\"all\" is capped at n={MAX_ALL_QUERIES_N}, got {n}")));
                    }
                }
                Queries::List(list) => {
                    for s in list {
                        let p: crate::pauli::PauliString =
                            s.parse().map_err(|e: Error| cfg_err("queries", e.to_string()))?;
                        if self.n.iter().any(|&n| p.n() != n) {
                            return Err(cfg_err("queries", format!("'{s}' does not match every n")));
                        }
                    }
                }
                Queries::Set(QuerySet::Z) => {}
            }
        }
        if verify {
            if self.suite.is_none() {
                return Err(cfg_err("suite", "verify needs a suite (analytic | design | norm)"));
            }
            for c in &self.verify.cases {
                if c.k < 2 || c.k > c.n || c.n > 8 {
                    return Err(cfg_err("verify.cases", format!("bad case n={}, k={}", c.n, c.k)));
                }
            }
            if let Some(m) = self.verify.moments.iter().find(|&&m| m != 1 && m != 2) {
                return Err(cfg_err("verify.moments", format!("{m} not in {{1, 2}}")));
            }
            for f in &self.verify.families {
                let ok = match f {
                    FamilySpec::Hea { width, .. } => (2..=4).contains(width),
                    FamilySpec::Haar { dim } => *dim >= 2 && *dim <= 16,
                };
                if !ok {
                    return Err(cfg_err("verify.families", format!("unsupported family {f:?}")));
                }
            }
            if !(2..=6).contains(&self.verify.norm_n) {
                return Err(cfg_err("verify.norm_n", "must be in 2..=6"));
            }
        }
        Ok(())
    }

    /// Whether operator experiments evaluate `w` with the tensor network.
    /// `auto` uses it for product observables other than the global
    /// projector, whose conjugate is a pure state and cheaper densely.
    pub fn use_tn(&self, w: &Observable) -> bool {
        let product = *w != Observable::LocalAverage;
        match self.path {
            EvalPath::Dense => false,
            EvalPath::Tn => product,
            EvalPath::Auto => product && *w != Observable::GlobalZero,
        }
    }
}
