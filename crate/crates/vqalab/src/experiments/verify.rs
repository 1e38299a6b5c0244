//! Verification suites: exact moments against Haar Monte-Carlo, design
//! moments of brickwork subcircuits, and the norm axioms of the averaged
//! fourth-power coefficient kernel.

use rand::Rng as _;

use super::config::{ExperimentConfig, FamilySpec, MuKind, Suite};
use super::{cell_seed, AnalyticRow, NormRow, Output};
use crate::analytic::{mc_mu_global, mc_mu_z, mu_global, mu_z, BitTuple};
use crate::error::{Error, Result};
use crate::haar::{design_check, random_hermitian, DesignFamily};
use crate::linalg::ComplexMatrix;
use crate::pauli::{all_coefficients, l4_kernel};
use crate::rng::{map_samples, substream};
use crate::stats::Estimate;

/// Random `(p, q, r, s)` tuples with per-qubit structure: each qubit is
/// all-equal, trace-paired (`x x y y`), swap-paired (`x y y x`) or free,
/// so that many tuples have nonzero moments. The all-zero tuple comes
/// first.
pub fn random_bit_tuples(n: usize, count: usize, seed: u64) -> Vec<BitTuple> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push([vec![0; n], vec![0; n], vec![0; n], vec![0; n]]);
    for t in 1..count {
        let mut rng = substream(seed, t as u64);
        let mut tuple: BitTuple = [vec![0; n], vec![0; n], vec![0; n], vec![0; n]];
        for j in 0..n {
            let (x, y): (u8, u8) = (rng.gen_range(0..2), rng.gen_range(0..2));
            let bits = match rng.gen_range(0..4) {
                0 => [x, x, x, x],
                1 => [x, x, y, y],
                2 => [x, y, y, x],
                _ => [x, y, rng.gen_range(0..2), rng.gen_range(0..2)],
            };
            for (v, b) in tuple.iter_mut().zip(bits) {
                v[j] = b;
            }
        }
        out.push(tuple);
    }
    out
}

fn tuple_label(t: &BitTuple) -> String {
    t.iter()
        .map(|v| v.iter().map(|b| char::from(b'0' + b)).collect::<String>())
        .collect::<Vec<_>>()
        .join("-")
}

fn analytic_suite(cfg: &ExperimentConfig) -> Result<Vec<AnalyticRow>> {
    let v = &cfg.verify;
    let mut rows = Vec::new();
    for (ci, c) in v.cases.iter().enumerate() {
        let seed = cell_seed(cfg.seed, &[0xa11, ci as u64]);
        let (tuples, est, exact): (Vec<BitTuple>, Vec<Estimate>, Vec<f64>) = match c.kind {
            MuKind::Global => {
                let tuples = random_bit_tuples(c.n, v.tuples, seed);
                let est = mc_mu_global(c.n, c.k, &tuples, cfg.samples, seed)?;
                let exact =
                    tuples.iter().map(|t| mu_global(c.n, c.k, &t[0], &t[1], &t[2], &t[3])).collect::<Result<_>>()?;
                (tuples, est, exact)
            }
            MuKind::Local => {
                let z = vec![0u8; c.n];
                let tuples = vec![[z.clone(), z.clone(), z.clone(), z]];
                let i = c.n - 1;
                let est = mc_mu_z(c.n, c.k, i, &tuples, cfg.samples, seed)?;
                let exact =
                    tuples.iter().map(|t| mu_z(c.n, c.k, i, &t[0], &t[1], &t[2], &t[3])).collect::<Result<_>>()?;
                (tuples, est, exact)
            }
        };
        let kind = match c.kind {
            MuKind::Global => "global",
            MuKind::Local => "local",
        };
        for ((t, e), x) in tuples.iter().zip(est).zip(exact) {
            rows.push(AnalyticRow {
                test_id: format!("{kind}:{}", tuple_label(t)),
                n: c.n,
                k: c.k,
                exact: x,
                mc_estimate: e.mean,
                se: e.se,
                pass: e.within(x, 3.0),
            });
        }
    }
    Ok(rows)
}

fn design_suite(cfg: &ExperimentConfig) -> Result<Vec<crate::haar::DesignRow>> {
    let v = &cfg.verify;
    let mut rows = Vec::new();
    for (fi, f) in v.families.iter().enumerate() {
        let fam = match f {
            FamilySpec::Hea { width, depth } => DesignFamily::Hea { width: *width, depth: *depth },
            FamilySpec::Haar { dim } => DesignFamily::Haar { dim: *dim },
        };
        for &m in &v.moments {
            let seed = cell_seed(cfg.seed, &[0xde5, fi as u64, m as u64]);
            rows.extend(design_check(&fam, m, cfg.samples, v.design_tuples, seed)?.rows);
        }
    }
    Ok(rows)
}

/// Per-sample kernel `(Σ_P tr(K_P W')⁴)^{1/4}` of `W' = C(θ)† W C(θ)` for
/// each operator, sharing the parameter samples.
fn kernel_samples(cfg: &ExperimentConfig, ops: &[ComplexMatrix], seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = cfg.verify.norm_n;
    let k = cfg.ansatz.widths(n)[0];
    let ansatz = cfg.ansatz.build(n, k)?;
    let per: Vec<Result<Vec<f64>>> = map_samples(cfg.samples, seed, |rng, _| {
        let th = ansatz.random_params(rng);
        let u = ansatz.dense_unitary(&th)?;
        ops.iter()
            .map(|w| {
                let m = u.adjoint() * w * &u;
                let c = all_coefficients(&m)?;
                Ok(l4_kernel(&c))
            })
            .collect()
    });
    per.into_iter().collect()
}

fn norm_suite(cfg: &ExperimentConfig) -> Result<Vec<NormRow>> {
    let v = &cfg.verify;
    let dim = 1usize << v.norm_n;
    if cfg.samples < 2 {
        return Err(Error::Config { field: "samples".into(), msg: "norm suite needs at least 2 samples".into() });
    }
    let mut rows = Vec::new();
    let zero = ComplexMatrix::zeros(dim, dim);
    let z = kernel_samples(cfg, &[zero], cell_seed(cfg.seed, &[0x0, 0]))?;
    let zmax = z.iter().map(|x| x[0]).fold(0.0, f64::max);
    rows.push(NormRow { test_id: "zero".into(), check: "positivity".into(), lhs: zmax, rhs: 0.0, se: 0.0, pass: zmax == 0.0 });
    for pair in 0..v.pairs {
        let seed = cell_seed(cfg.seed, &[0x404, pair as u64]);
        let mut rng = substream(seed, u64::MAX);
        let w1 = random_hermitian(&mut rng, dim);
        let w2 = random_hermitian(&mut rng, dim);
        let c: f64 = rng.gen_range(0.1..3.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let scaled = &w1 * crate::linalg::C64::new(c, 0.0);
        let sum = &w1 + &w2;
        let s = kernel_samples(cfg, &[w1, w2, sum, scaled], seed)?;
        let col = |i: usize| -> Vec<f64> { s.iter().map(|x| x[i]).collect() };
        let (n1, n2, n12, nc) = (col(0), col(1), col(2), col(3));
        let e = |x: &[f64]| Estimate::mean_of(x);
        let gap: Vec<f64> = (0..s.len()).map(|i| n1[i] + n2[i] - n12[i]).collect();
        let g = e(&gap);
        rows.push(NormRow {
            test_id: format!("pair{pair}"),
            check: "triangle".into(),
            lhs: e(&n12).mean,
            rhs: e(&n1).mean + e(&n2).mean,
            se: g.se,
            pass: g.mean >= -3.0 * g.se - 1e-12,
        });
        let hom: Vec<f64> = (0..s.len()).map(|i| nc[i] - c.abs() * n1[i]).collect();
        let h = e(&hom);
        rows.push(NormRow {
            test_id: format!("pair{pair}"),
            check: "homogeneity".into(),
            lhs: e(&nc).mean,
            rhs: c.abs() * e(&n1).mean,
            se: h.se,
            pass: h.within(0.0, 3.0) || h.mean.abs() <= 1e-12 * e(&nc).mean,
        });
        let min = n1.iter().chain(&n2).copied().fold(f64::INFINITY, f64::min);
        rows.push(NormRow {
            test_id: format!("pair{pair}"),
            check: "positivity".into(),
            lhs: min,
            rhs: 0.0,
            se: 0.0,
            pass: min > 0.0,
        });
    }
    Ok(rows)
}

pub fn run_verify(cfg: &ExperimentConfig, suite: Suite) -> Result<Output> {
    match suite {
        Suite::Analytic => analytic_suite(cfg).map(Output::Analytic),
        Suite::Design => design_suite(cfg).map(Output::Design),
        Suite::Norm => norm_suite(cfg).map(Output::Norm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_are_reproducible_and_start_at_zero() {
        let a = random_bit_tuples(4, 5, 3);
        assert_eq!(a, random_bit_tuples(4, 5, 3));
        assert!(a[0].iter().all(|v| v.iter().all(|&b| b == 0)));
        assert_eq!(tuple_label(&a[0]), "0000-0000-0000-0000");
    }

    #[test]
    fn observable_free_suite_needs_no_observables() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment":"verify","suite":"norm","ansatz":{"kind":"mps","k":2,"depth":2},
            "samples":20,"seed":5,"verify":{"pairs":2}}"#,
        )
        .unwrap();
        let out = run_verify(&cfg, Suite::Norm).unwrap();
        assert_eq!(out.failures(), 0);
    }
}
