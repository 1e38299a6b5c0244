//! Runners that sample the objective over circuit parameters: cost
//! variance, gradient variance and SPSA training.

use rand::Rng as _;

use super::config::{ExperimentConfig, InputState};
use super::spsa::Spsa;
use super::{cell_seed, LearnRow, ResultRecord};
use crate::analytic::{local_average_variance, mu_global, theorem1_bound, theorem2_bound};
use crate::circuits::{Ansatz, AnsatzKind};
use crate::error::Result;
use crate::haar::sample_haar;
use crate::linalg::{dense_to_mat2, Statevector, C64};
use crate::observables::{parameter_shift_grad, Observable};
use crate::rng::{map_samples, substream};
use crate::stats::Estimate;

const TAG_INPUT: u64 = 0x1_0000;

/// Input state number `index` for `n` qubits. `random-hea` states apply a
/// brickwork whose single-qubit gates are Haar random, seeded by `seed`
/// and `index`.
pub fn prepare_input(input: &InputState, n: usize, index: usize, seed: u64) -> Result<Statevector> {
    match input {
        InputState::Zero => Ok(Statevector::zero(n)),
        InputState::Product(a) => {
            let qubits: Vec<[C64; 2]> = (0..n)
                .map(|q| {
                    let t = if a.len() == 1 { a[0] } else { a[q] };
                    let (s, c) = (0.5 * t).sin_cos();
                    [C64::new(c, 0.0), C64::new(s, 0.0)]
                })
                .collect();
            Statevector::product(&qubits)
        }
        InputState::RandomHea(depth) => {
            let hea = Ansatz::hea(n, depth.resolve(n, n))?;
            let mut rng = substream(cell_seed(seed, &[TAG_INPUT, n as u64]), index as u64);
            let mut psi = Statevector::zero(n);
            for b in hea.blocks() {
                psi.apply_1q(b.a, &dense_to_mat2(&sample_haar(&mut rng, 2)));
                psi.apply_1q(b.b, &dense_to_mat2(&sample_haar(&mut rng, 2)));
                psi.apply_cnot(b.a, b.b);
            }
            Ok(psi)
        }
    }
}

/// `(n, k)` cells in sweep order.
pub(crate) fn cells(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    cfg.n.iter().flat_map(|&n| cfg.ansatz.widths(n).into_iter().map(move |k| (n, k))).collect()
}

struct Rec<'a> {
    id: &'a str,
    n: usize,
    k: usize,
    obs: String,
    seed: u64,
}

impl Rec<'_> {
    fn row(&self, statistic: &str, e: Estimate) -> ResultRecord {
        ResultRecord {
            experiment_id: self.id.to_string(),
            n: self.n,
            k: self.k,
            observable: self.obs.clone(),
            statistic: statistic.to_string(),
            value: e.mean,
            se: e.se,
            samples: e.samples,
            seed: self.seed,
        }
    }
}

/// Average of per-state estimates; SEs combine in quadrature.
fn pool(es: &[Estimate]) -> Estimate {
    let m = es.len() as f64;
    Estimate {
        mean: es.iter().map(|e| e.mean).sum::<f64>() / m,
        se: es.iter().map(|e| e.se * e.se).sum::<f64>().sqrt() / m,
        samples: es.iter().map(|e| e.samples).sum(),
    }
}

/// Mean, second moment and variance of `f(θ)` per cell. The local average
/// also reports `(1/4n²) Σ_i E[⟨Z_i⟩²]` from the same samples, and MPS
/// cells with a product input report the concentration bounds (and the
/// exact variance for `|0…0⟩`).
pub fn run_variance(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let id = cfg.experiment_id();
    let input = cfg.parsed_input_state()?;
    let mut out = Vec::new();
    if cfg.samples == 0 {
        return Ok(out);
    }
    for (n, k) in cells(cfg) {
        let ansatz = cfg.ansatz.build(n, k)?;
        let inputs: Vec<Statevector> =
            (0..cfg.input_states).map(|s| prepare_input(&input, n, s, cfg.seed)).collect::<Result<_>>()?;
        for (oi, w) in cfg.observables_at(n)?.iter().enumerate() {
            let seed = cell_seed(cfg.seed, &[n as u64, k as u64, oi as u64]);
            let rec = Rec { id: &id, n, k, obs: w.to_string(), seed };
            let (mut mean, mut second, mut var, mut decomp) = (vec![], vec![], vec![], vec![]);
            for (si, sigma) in inputs.iter().enumerate() {
                let vals: Vec<Result<(f64, f64)>> = map_samples(cfg.samples, seed ^ ((si as u64) << 40), |rng, _| {
                    let th = ansatz.random_params(rng);
                    let psi = ansatz.apply(&th, sigma)?;
                    let f = w.expectation_in(&psi)?;
                    let zsq = if *w == Observable::LocalAverage {
                        (0..n).map(|q| (2.0 * psi.prob_zero(q) - 1.0).powi(2)).sum::<f64>() / (4 * n * n) as f64
                    } else {
                        0.0
                    };
                    Ok((f, zsq))
                });
                let vals: Vec<(f64, f64)> = vals.into_iter().collect::<Result<_>>()?;
                let f: Vec<f64> = vals.iter().map(|v| v.0).collect();
                let f2: Vec<f64> = f.iter().map(|x| x * x).collect();
                let z: Vec<f64> = vals.iter().map(|v| v.1).collect();
                mean.push(Estimate::mean_of(&f));
                second.push(Estimate::mean_of(&f2));
                var.push(Estimate::variance_of(&f));
                decomp.push(Estimate::mean_of(&z));
            }
            out.push(rec.row("mean", pool(&mean)));
            out.push(rec.row("second_moment", pool(&second)));
            out.push(rec.row("variance", pool(&var)));
            if *w == Observable::LocalAverage {
                out.push(rec.row("z_decomposition", pool(&decomp)));
            }
            let product_input = matches!(input, InputState::Zero | InputState::Product(_));
            if ansatz.kind() == AnsatzKind::Mps && product_input {
                // product inputs have h₁ = 1 and h₂ = 0
                match w {
                    Observable::GlobalZero => {
                        out.push(rec.row("theorem1_bound", Estimate::exact(theorem1_bound(n, k, 1.0))));
                        if input == InputState::Zero {
                            let z = vec![0u8; n];
                            let exact = mu_global(n, k, &z, &z, &z, &z)? - 4f64.powi(-(n as i32));
                            out.push(rec.row("exact_variance", Estimate::exact(exact)));
                        }
                    }
                    Observable::LocalAverage => {
                        out.push(rec.row("theorem2_bound", Estimate::exact(theorem2_bound(n, k, 0.0))));
                        if input == InputState::Zero {
                            out.push(rec.row("exact_variance", Estimate::exact(local_average_variance(n, k)?)));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(out)
}

/// Parameter-shift derivatives over uniform `θ`. Rows per differentiated
/// index `j` (`grad_mean:j`, `grad_variance:j`), plus aggregates over the
/// indices: `grad_variance_avg` (mean of the per-index variances, SE from
/// the per-sample average of squared derivatives) and `grad_mean_avg`
/// (mean derivative pooled over indices, SE from per-sample averages).
pub fn run_grad_variance(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let id = cfg.experiment_id();
    let input = cfg.parsed_input_state()?;
    let mut out = Vec::new();
    if cfg.samples == 0 {
        return Ok(out);
    }
    for (n, k) in cells(cfg) {
        let ansatz = cfg.ansatz.build(n, k)?;
        let sigma = prepare_input(&input, n, 0, cfg.seed)?;
        let idx: Vec<usize> = cfg.grad_params.clone().unwrap_or_else(|| (0..ansatz.num_params()).collect());
        if idx.is_empty() {
            continue;
        }
        for (oi, w) in cfg.observables_at(n)?.iter().enumerate() {
            let seed = cell_seed(cfg.seed, &[n as u64, k as u64, oi as u64]);
            let rec = Rec { id: &id, n, k, obs: w.to_string(), seed };
            let grads: Vec<Result<Vec<f64>>> = map_samples(cfg.samples, seed, |rng, _| {
                let th = ansatz.random_params(rng);
                idx.iter().map(|&j| parameter_shift_grad(&sigma, w, &ansatz, &th, j)).collect()
            });
            let grads: Vec<Vec<f64>> = grads.into_iter().collect::<Result<_>>()?;
            let mut vars = Vec::with_capacity(idx.len());
            for (c, &j) in idx.iter().enumerate() {
                let col: Vec<f64> = grads.iter().map(|g| g[c]).collect();
                out.push(rec.row(&format!("grad_mean:{j}"), Estimate::mean_of(&col)));
                let v = Estimate::variance_of(&col);
                vars.push(v.mean);
                out.push(rec.row(&format!("grad_variance:{j}"), v));
            }
            let m = idx.len() as f64;
            let sq: Vec<f64> = grads.iter().map(|g| g.iter().map(|x| x * x).sum::<f64>() / m).collect();
            let avg = Estimate { mean: vars.iter().sum::<f64>() / m, ..Estimate::mean_of(&sq) };
            out.push(rec.row("grad_variance_avg", avg));
            let means: Vec<f64> = grads.iter().map(|g| g.iter().sum::<f64>() / m).collect();
            out.push(rec.row("grad_mean_avg", Estimate::mean_of(&means)));
        }
    }
    Ok(out)
}

/// SPSA maximization of `f`, one row per iteration and run. Infidelity is
/// `1 − |⟨0…0|C(θ)|σ⟩|²`.
pub fn run_learn(cfg: &ExperimentConfig) -> Result<Vec<LearnRow>> {
    let id = cfg.experiment_id();
    let input = cfg.parsed_input_state()?;
    let spsa = Spsa::from(&cfg.spsa);
    let [lo, hi] = cfg.spsa.init_range;
    let mut out = Vec::new();
    for (n, k) in cells(cfg) {
        let ansatz = cfg.ansatz.build(n, k)?;
        let sigma = prepare_input(&input, n, 0, cfg.seed)?;
        for (oi, w) in cfg.observables_at(n)?.iter().enumerate() {
            let seed = cell_seed(cfg.seed, &[n as u64, k as u64, oi as u64]);
            let runs: Vec<Result<Vec<LearnRow>>> = map_samples(cfg.seeds, seed, |rng, s| {
                let mut th: Vec<f64> =
                    (0..ansatz.num_params()).map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo }).collect();
                let f = |t: &[f64]| w.expectation_in(&ansatz.apply(t, &sigma)?);
                let mut rows = Vec::with_capacity(cfg.spsa.iterations);
                for j in 0..cfg.spsa.iterations {
                    spsa.step(j, &mut th, rng, &f)?;
                    let psi = ansatz.apply(&th, &sigma)?;
                    rows.push(LearnRow {
                        experiment_id: id.clone(),
                        n,
                        k,
                        observable: w.to_string(),
                        seed: seed ^ s as u64,
                        iteration: j + 1,
                        objective: w.expectation_in(&psi)?,
                        infidelity: 1.0 - psi.amplitudes()[0].norm_sqr(),
                    });
                }
                Ok(rows)
            });
            for r in runs {
                out.extend(r?);
            }
        }
    }
    Ok(out)
}
