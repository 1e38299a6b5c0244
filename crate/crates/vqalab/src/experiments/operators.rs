//! Runners over the Heisenberg-evolved observable `C(θ)† W C(θ)`: its
//! 𝕂-norm and its Pauli-coefficient distribution.

use super::config::{ExperimentConfig, Queries, QuerySet};
use super::sampling::cells;
use super::{cell_seed, PauliRow, PauliSummaryRow, ResultRecord};
use crate::circuits::Ansatz;
use crate::error::Result;
use crate::linalg::Statevector;
use crate::observables::Observable;
use crate::pauli::{all_coefficients, k_norm_from_coefficients, PauliString};
use crate::rng::map_samples;
use crate::stats::{quantile, Estimate};
use crate::tensornet::{gate_counts, heisenberg_evolve, product_two_norm, routed_gates, PauliMPS};

/// All Pauli coefficients of `C(θ)† W C(θ)` from dense matrices.
pub(crate) fn dense_coefficients(w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> Result<Vec<f64>> {
    let n = ansatz.n();
    if *w == Observable::GlobalZero {
        let phi = ansatz.apply_adjoint(theta, &Statevector::zero(n))?;
        return all_coefficients(&phi.density_matrix());
    }
    let u = ansatz.dense_unitary(theta)?;
    all_coefficients(&(u.adjoint() * w.dense(n)? * u))
}

/// `‖C(θ)† W C(θ)‖_𝕂`, on the tensor-network path for product observables
/// and densely otherwise.
pub fn evolved_k_norm(w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> Result<f64> {
    let n = ansatz.n();
    if w.product_factors(n).is_some() {
        let (mps, _) = heisenberg_evolve(w, ansatz, theta)?;
        return mps.k_norm(product_two_norm(w, n)?);
    }
    k_norm_from_coefficients(&dense_coefficients(w, ansatz, theta)?)
}

enum Evolved {
    Tn(PauliMPS, usize),
    Dense(Vec<f64>),
}

fn evolve(cfg: &ExperimentConfig, w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> Result<Evolved> {
    if cfg.use_tn(w) {
        let (mps, stats) = heisenberg_evolve(w, ansatz, theta)?;
        Ok(Evolved::Tn(mps, stats.max_bond))
    } else {
        Ok(Evolved::Dense(dense_coefficients(w, ansatz, theta)?))
    }
}

/// Mean `‖C(θ)† W C(θ)‖_𝕂` per cell (`k_norm`), plus the mean maximum bond
/// dimension (`max_bond`) and the routed gate count `R_V` (`r_v`) on the
/// tensor-network path.
pub fn run_cknorm(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let id = cfg.experiment_id();
    let mut out = Vec::new();
    if cfg.samples == 0 {
        return Ok(out);
    }
    for (n, k) in cells(cfg) {
        let ansatz = cfg.ansatz.build(n, k)?;
        for (oi, w) in cfg.observables_at(n)?.iter().enumerate() {
            let seed = cell_seed(cfg.seed, &[n as u64, k as u64, oi as u64]);
            let tn = cfg.use_tn(w);
            let two = if tn { product_two_norm(w, n)? } else { 0.0 };
            let vals: Vec<Result<(f64, f64)>> = map_samples(cfg.samples, seed, |rng, _| {
                let th = ansatz.random_params(rng);
                match evolve(cfg, w, &ansatz, &th)? {
                    Evolved::Tn(mps, bond) => Ok((mps.k_norm(two)?, bond as f64)),
                    Evolved::Dense(c) => Ok((k_norm_from_coefficients(&c)?, f64::NAN)),
                }
            });
            let vals: Vec<(f64, f64)> = vals.into_iter().collect::<Result<_>>()?;
            let row = |statistic: &str, e: Estimate| ResultRecord {
                experiment_id: id.clone(),
                n,
                k,
                observable: w.to_string(),
                statistic: statistic.into(),
                value: e.mean,
                se: e.se,
                samples: e.samples,
                seed,
            };
            let norms: Vec<f64> = vals.iter().map(|v| v.0).collect();
            out.push(row("k_norm", Estimate::mean_of(&norms)));
            if tn {
                let bonds: Vec<f64> = vals.iter().map(|v| v.1).collect();
                out.push(row("max_bond", Estimate::mean_of(&bonds)));
                let gates = routed_gates(&ansatz, &vec![0.0; ansatz.num_params()])?;
                let (_, sites) = gate_counts(n, &gates);
                let rv = sites.into_iter().max().unwrap_or(0);
                out.push(row("r_v", Estimate::exact(rv as f64)));
            }
        }
    }
    Ok(out)
}

fn query_strings(q: &Queries, n: usize) -> Result<Vec<PauliString>> {
    match q {
        Queries::Set(QuerySet::Z) => Ok((0..n).map(|i| PauliString::z(n, i)).collect()),
        Queries::Set(QuerySet::All) => Ok(PauliString::all(n).collect()),
        Queries::List(list) => list.iter().map(|s| s.parse()).collect(),
    }
}

/// `𝒫(P) = tr(K_P W')² / ‖W'‖₂²` for each queried Pauli and parameter
/// sample, with per-Pauli quantiles across samples.
pub fn run_pauli_dist(cfg: &ExperimentConfig) -> Result<(Vec<PauliRow>, Vec<PauliSummaryRow>)> {
    let id = cfg.experiment_id();
    let (mut rows, mut summary) = (Vec::new(), Vec::new());
    for (n, k) in cells(cfg) {
        let ansatz = cfg.ansatz.build(n, k)?;
        let queries = query_strings(&cfg.queries, n)?;
        for (oi, w) in cfg.observables_at(n)?.iter().enumerate() {
            let seed = cell_seed(cfg.seed, &[n as u64, k as u64, oi as u64]);
            let two_sq = if cfg.use_tn(w) { product_two_norm(w, n)?.powi(2) } else { 0.0 };
            let per_sample: Vec<Result<Vec<f64>>> = map_samples(cfg.samples, seed, |rng, _| {
                let th = ansatz.random_params(rng);
                match evolve(cfg, w, &ansatz, &th)? {
                    Evolved::Tn(mps, _) => queries.iter().map(|p| mps.coefficient(p)).collect(),
                    Evolved::Dense(c) => Ok(queries.iter().map(|p| c[p.index()]).collect()),
                }
            });
            let per_sample: Vec<Vec<f64>> = per_sample.into_iter().collect::<Result<_>>()?;
            let norm_sq = if cfg.use_tn(w) {
                two_sq
            } else {
                w.dense(n).map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>())?
            };
            let mut probs = vec![Vec::with_capacity(cfg.samples); queries.len()];
            for (t, coeffs) in per_sample.iter().enumerate() {
                for (qi, (p, &c)) in queries.iter().zip(coeffs).enumerate() {
                    let prob = c * c / norm_sq;
                    probs[qi].push(prob);
                    rows.push(PauliRow {
                        experiment_id: id.clone(),
                        n,
                        k,
                        observable: w.to_string(),
                        theta_sample_id: t,
                        pauli_string: p.to_string(),
                        coefficient: c,
                        probability: prob,
                    });
                }
            }
            if cfg.samples == 0 {
                continue;
            }
            for (p, ps) in queries.iter().zip(&probs) {
                summary.push(PauliSummaryRow {
                    experiment_id: id.clone(),
                    n,
                    k,
                    observable: w.to_string(),
                    pauli_string: p.to_string(),
                    samples: ps.len(),
                    min: quantile(ps, 0.0),
                    q1: quantile(ps, 0.25),
                    median: quantile(ps, 0.5),
                    q3: quantile(ps, 0.75),
                    max: quantile(ps, 1.0),
                });
            }
        }
    }
    Ok((rows, summary))
}
