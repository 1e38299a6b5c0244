//! Haar-random unitaries and the closed-form first and second moments.
//!
//! `A_U` denotes `U A U†` throughout.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::circuits::Ansatz;
use crate::error::{Error, Result};
use crate::linalg::{trace, ComplexMatrix, C64};
use crate::rng::{map_samples, Rng};
use crate::stats::Estimate;

/// Ginibre matrix, QR, then rephase columns by the phases of `diag(R)`.
pub fn sample_haar(rng: &mut Rng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Stateful Haar sampler over one substream.
#[derive(Debug, Clone)]
pub struct HaarSampler {
    seed: u64,
    rng: Rng,
}

impl HaarSampler {
    pub fn new(seed: u64) -> Self {
        HaarSampler { seed, rng: crate::rng::substream(seed, 0) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&mut self, dim: usize) -> ComplexMatrix {
        sample_haar(&mut self.rng, dim)
    }
}

fn square_dims(ms: &[&ComplexMatrix]) -> Result<usize> {
    let n = ms[0].nrows();
    for m in ms {
        if !m.is_square() || m.nrows() != n {
            return Err(Error::Dimension(format!(
                "moment arguments must be square and equal-sized, got {}x{} vs {n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    Ok(n)
}

/// `∫ tr(B A_U) dU = tr(A) tr(B) / N`.
pub fn first_moment_analytic(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    let n = square_dims(&[a, b])?;
    Ok(trace(a) * trace(b) / n as f64)
}

/// `∫ tr(B A_U) tr(D C_U) dU`.
pub fn second_moment_analytic(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<C64> {
    let n = square_dims(&[a, b, c, d])? as f64;
    if n < 2.0 {
        return Err(Error::Dimension("second moment needs N >= 2".into()));
    }
    let (ta, tb, tc, td) = (trace(a), trace(b), trace(c), trace(d));
    let tac = trace(&(a * c));
    let tbd = trace(&(b * d));
    Ok((ta * tb * tc * td + tac * tbd) / (n * n - 1.0)
        - (tac * tb * td + ta * tc * tbd) / (n * (n * n - 1.0)))
}

pub fn conjugate(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    u * a * u.adjoint()
}

/// Monte-Carlo estimates of the real and imaginary parts of `E[g(U)]`.
pub fn monte_carlo<F>(samples: usize, seed: u64, draw: F) -> (Estimate, Estimate)
where
    F: Fn(&mut Rng) -> C64 + Sync,
{
    let vals = map_samples(samples, seed, |rng, _| draw(rng));
    let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
    let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
    (Estimate::mean_of(&re), Estimate::mean_of(&im))
}

/// Unitary ensembles whose moments can be compared to Haar values.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignFamily {
    /// Brickwork subcircuit of the given width and depth, uniform angles.
    Hea { width: usize, depth: usize },
    Haar { dim: usize },
    /// Always returns the same unitary.
    Fixed(ComplexMatrix),
}

impl DesignFamily {
    pub fn dim(&self) -> usize {
        match self {
            DesignFamily::Hea { width, .. } => 1 << width,
            DesignFamily::Haar { dim } => *dim,
            DesignFamily::Fixed(u) => u.nrows(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DesignFamily::Hea { .. } => "hea",
            DesignFamily::Haar { .. } => "haar",
            DesignFamily::Fixed(_) => "fixed",
        }
    }

    pub fn width(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn depth(&self) -> usize {
        match self {
            DesignFamily::Hea { depth, .. } => *depth,
            _ => 0,
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<ComplexMatrix> {
        match self {
            DesignFamily::Hea { width, depth } => {
                let a = Ansatz::hea(*width, *depth)?;
                let th = a.random_params(rng);
                a.dense_unitary(&th)
            }
            DesignFamily::Haar { dim } => Ok(sample_haar(rng, *dim)),
            DesignFamily::Fixed(u) => Ok(u.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignRow {
    pub family: String,
    pub width: usize,
    pub depth: usize,
    pub moment: u8,
    pub test_id: String,
    pub analytic: f64,
    pub estimate: f64,
    pub se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub rows: Vec<DesignRow>,
}

impl DesignReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.estimate - r.analytic).abs()).fold(0.0, f64::max)
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Test operators for moment checks: `|0⟩⟨0|`, `Z` on the first qubit and
/// seeded random Hermitian matrices.
pub fn design_operators(dim: usize, random: usize, seed: u64) -> Vec<(String, ComplexMatrix)> {
    let mut out = Vec::new();
    let mut p0 = ComplexMatrix::zeros(dim, dim);
    p0[(0, 0)] = C64::new(1.0, 0.0);
    out.push(("proj0".to_string(), p0));
    let z = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i < dim / 2 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    });
    out.push(("z1".to_string(), z));
    for r in 0..random {
        let mut rng = crate::rng::substream(seed, r as u64);
        out.push((format!("herm{r}"), random_hermitian(&mut rng, dim)));
    }
    out
}

/// `(G + G†)/2` for a complex Ginibre `G`.
pub fn random_hermitian(rng: &mut Rng, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Compares parameter-averaged moment polynomials against the Haar values.
///
/// Moment 1 evaluates `tr(B A_U)` for operator pairs `(A, B)`; moment 2
/// evaluates `tr(B A_U) tr(D C_U)` for quadruples. Two fixed tuples built
/// from `|0⟩⟨0|` and `Z_1` are followed by `random_tuples` tuples of seeded
/// random Hermitian matrices. A row passes when the estimate is within
/// `3 SE` of the analytic value.
pub fn design_check(
    family: &DesignFamily,
    moment: u8,
    trials: usize,
    random_tuples: usize,
    seed: u64,
) -> Result<DesignReport> {
    if moment != 1 && moment != 2 {
        return Err(Error::Config { field: "moment".into(), msg: format!("{moment} not in {{1, 2}}") });
    }
    let dim = family.dim();
    let arity = 2 * moment as usize;
    let ops = design_operators(dim, arity * random_tuples, seed ^ 0x5eed);
    let (p0, z1) = (ops[0].1.clone(), ops[1].1.clone());
    let mut tuples: Vec<(String, Vec<ComplexMatrix>)> = if moment == 1 {
        vec![
            ("proj0-proj0".into(), vec![p0.clone(), p0.clone()]),
            ("proj0-z1".into(), vec![p0, z1]),
        ]
    } else {
        vec![
            ("proj0-z1-proj0-z1".into(), vec![p0.clone(), z1.clone(), p0.clone(), z1]),
            ("proj0-proj0-proj0-proj0".into(), vec![p0; 4]),
        ]
    };
    for chunk in ops[2..].chunks(arity) {
        let id = chunk.iter().map(|o| o.0.as_str()).collect::<Vec<_>>().join("-");
        tuples.push((id, chunk.iter().map(|o| o.1.clone()).collect()));
    }
    let unitaries: Vec<Result<ComplexMatrix>> = map_samples(trials, seed, |rng, _| family.sample(rng));
    let unitaries: Vec<ComplexMatrix> = unitaries.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (id, t) in tuples {
        let analytic = if moment == 1 {
            first_moment_analytic(&t[0], &t[1])?
        } else {
            second_moment_analytic(&t[0], &t[1], &t[2], &t[3])?
        };
        let vals: Vec<f64> = unitaries
            .iter()
            .map(|u| {
                let x = trace(&(&t[1] * conjugate(u, &t[0])));
                if moment == 1 {
                    x.re
                } else {
                    (x * trace(&(&t[3] * conjugate(u, &t[2])))).re
                }
            })
            .collect();
        let est = Estimate::mean_of(&vals);
        rows.push(DesignRow {
            family: family.name().to_string(),
            width: family.width(),
            depth: family.depth(),
            moment,
            test_id: id,
            analytic: analytic.re,
            estimate: est.mean,
            se: est.se,
            pass: est.within(analytic.re, 3.0),
        });
    }
    Ok(DesignReport { rows })
}
