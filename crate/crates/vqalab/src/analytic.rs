//! Exact second moments of the MPS ansatz with Haar subcircuits, the
//! concentration bounds, and the `h₁` / `h₂` state functionals.
//!
//! The two-copy moment operator of a window twirled by a Haar unitary of
//! dimension `N = 2^k` is `c₁ I⊗I + c₂ S` (`S` the copy swap) with
//!
//! ```text
//! c₁ = (tr X − tr(XS)/N) / (N² − 1),   c₂ = (tr(XS) − tr X/N) / (N² − 1).
//! ```
//!
//! Sliding the window by one qubit contracts the departing qubit against the
//! observable (`g_I`, `g_S` below) and brings in a fresh qubit whose input
//! carries the deltas `δ_tr = δ_pq δ_rs` and `δ_ip = δ_qr δ_ps`. Each slide is
//! therefore a 2×2 linear map on `(c₁, c₂)`.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Statevector, C64, ONE, ZERO};
use crate::rng::{substream, Rng};

/// How the qubit leaving the window is contracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Contraction {
    /// Projected on `|0⟩` in both copies.
    GlobalZero,
    /// Traced out (identity factor of a local observable).
    Identity,
}

impl Contraction {
    /// `(g_I, g_S)`: value of the contracted `I⊗I` and `S` on one qubit.
    pub fn weights(self) -> (f64, f64) {
        match self {
            Contraction::GlobalZero => (1.0, 1.0),
            Contraction::Identity => (4.0, 2.0),
        }
    }
}

/// Map `(c₁, c₂) → (c₁', c₂')` for one window slide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferMatrix2 {
    pub m: [[f64; 2]; 2],
}

impl TransferMatrix2 {
    pub fn new(k: usize, delta_tr: f64, delta_ip: f64, contraction: Contraction) -> Self {
        let nn = (1u64 << k) as f64;
        let m = nn / 2.0;
        let (gi, gs) = contraction.weights();
        let d = nn * nn - 1.0;
        // tr X = δ_tr (g_I m² c₁ + g_S m c₂), tr XS = δ_ip (g_I m c₁ + g_S m² c₂)
        let tx = [delta_tr * gi * m * m, delta_tr * gs * m];
        let ts = [delta_ip * gi * m, delta_ip * gs * m * m];
        TransferMatrix2 {
            m: [
                [(tx[0] - ts[0] / nn) / d, (tx[1] - ts[1] / nn) / d],
                [(ts[0] - tx[0] / nn) / d, (ts[1] - tx[1] / nn) / d],
            ],
        }
    }

    pub fn apply(&self, c: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * c[0] + self.m[0][1] * c[1],
            self.m[1][0] * c[0] + self.m[1][1] * c[1],
        ]
    }

    pub fn eigenvalues(&self) -> [C64; 2] {
        let [[a, b], [c, d]] = self.m;
        let tr = a + d;
        let det = a * d - b * c;
        let disc = C64::new(tr * tr - 4.0 * det, 0.0).sqrt();
        [(C64::new(tr, 0.0) + disc) / 2.0, (C64::new(tr, 0.0) - disc) / 2.0]
    }
}

/// `(c₁, c₂)` after twirling an `N`-dimensional window.
pub fn twirl(tr_x: f64, tr_xs: f64, dim: f64) -> [f64; 2] {
    let d = dim * dim - 1.0;
    [(tr_x - tr_xs / dim) / d, (tr_xs - tr_x / dim) / d]
}

fn check_bits(n: usize, strings: [&[u8]; 4]) -> Result<()> {
    for s in strings {
        if s.len() != n {
            return Err(Error::Dimension(format!("bit string of length {} for n={n}", s.len())));
        }
        if s.iter().any(|&b| b > 1) {
            return Err(Error::Parse("bit strings hold 0/1 only".into()));
        }
    }
    Ok(())
}

fn window_moments(p: &[u8], q: &[u8], r: &[u8], s: &[u8], k: usize) -> [f64; 2] {
    let eq = |a: &[u8], b: &[u8]| (a[..k] == b[..k]) as u8 as f64;
    let tr_x = eq(p, q) * eq(r, s);
    let tr_xs = eq(q, r) * eq(p, s);
    twirl(tr_x, tr_xs, (1u64 << k) as f64)
}

fn run_chain(n: usize, k: usize, p: &[u8], q: &[u8], r: &[u8], s: &[u8], con: Contraction) -> [f64; 2] {
    let mut c = window_moments(p, q, r, s, k);
    for j in k..n {
        let dtr = ((p[j] == q[j]) && (r[j] == s[j])) as u8 as f64;
        let dip = ((q[j] == r[j]) && (p[j] == s[j])) as u8 as f64;
        c = TransferMatrix2::new(k, dtr, dip, con).apply(c);
    }
    c
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::Geometry(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    Ok(())
}

/// `E[⟨0|C|p⟩⟨q|C†|0⟩ ⟨0|C|r⟩⟨s|C†|0⟩]` over Haar subcircuits, i.e. the
/// second moment of the global projector between `|p⟩⟨q|` and `|r⟩⟨s|`.
pub fn mu_global(n: usize, k: usize, p: &[u8], q: &[u8], r: &[u8], s: &[u8]) -> Result<f64> {
    check_nk(n, k)?;
    check_bits(n, [p, q, r, s])?;
    let c = run_chain(n, k, p, q, r, s, Contraction::GlobalZero);
    Ok(c[0] + c[1])
}

/// Same moment for `Z_i` (0-based `i`). Subcircuits whose windows start
/// after the last one containing `i` cancel, leaving an instance on the
/// first `min(n, i + k)` qubits.
pub fn mu_z(n: usize, k: usize, i: usize, p: &[u8], q: &[u8], r: &[u8], s: &[u8]) -> Result<f64> {
    check_nk(n, k)?;
    check_bits(n, [p, q, r, s])?;
    if i >= n {
        return Err(Error::Dimension(format!("qubit {i} outside 0..{n}")));
    }
    let eff = n.min(i + k);
    let c = run_chain(eff, k, p, q, r, s, Contraction::Identity);
    let tail: f64 = (eff..n)
        .map(|j| ((p[j] == q[j]) && (r[j] == s[j])) as u8 as f64)
        .product();
    Ok(tail * (1u64 << k) as f64 * c[1])
}

/// `E[tr(Z_i (|0⟩⟨0|)_{C})²]` for `Z_i` in the last window.
pub fn mu_local_zero(n: usize, k: usize) -> Result<f64> {
    let z = vec![0u8; n];
    mu_z(n, k, n - 1, &z, &z, &z, &z)
}

/// Closed form of [`mu_local_zero`]: `B₀ + B₁ B₂^{n−k−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalClosedForm {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl LocalClosedForm {
    /// With `x = 2^k`: `B₀ = 2/(x²+2)`, `B₂ = (x²−4)/(2(x²−1))` (the
    /// non-unit eigenvalue of the local slide) and
    /// `B₁ = B₂ · x(x−2)/((x+1)(x²+2))`.
    pub fn new(k: usize) -> Self {
        let x = (1u64 << k) as f64;
        let b0 = 2.0 / (x * x + 2.0);
        let b2 = (x * x - 4.0) / (2.0 * (x * x - 1.0));
        let b1 = b2 * x * (x - 2.0) / ((x + 1.0) * (x * x + 2.0));
        LocalClosedForm { b0, b1, b2 }
    }

    pub fn value(&self, n: usize, k: usize) -> f64 {
        self.b0 + self.b1 * self.b2.powi(n as i32 - k as i32 - 1)
    }
}

/// Exact `Var(f)` for the local average observable and a product input:
/// `(1/4n²) Σ_i E[tr(Z_i σ_C)²]`.
pub fn local_average_variance(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let z = vec![0u8; n];
    let mut sum = 0.0;
    for i in 0..n {
        sum += mu_z(n, k, i, &z, &z, &z, &z)?;
    }
    Ok(sum / (4.0 * (n * n) as f64))
}

/// `h₁ / 4^{n−k−1}`.
pub fn theorem1_bound(n: usize, k: usize, h1: f64) -> f64 {
    h1 / 4f64.powi(n as i32 - k as i32 - 1)
}

/// `1/(n(2^{2k+1}+4)) − h₂/(2n)`; may be negative.
pub fn theorem2_bound(n: usize, k: usize, h2: f64) -> f64 {
    let nf = n as f64;
    1.0 / (nf * (2f64.powi(2 * k as i32 + 1) + 4.0)) - h2 / (2.0 * nf)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: u8,
    pub n: usize,
    pub k: usize,
    pub h1: f64,
    pub h2: f64,
    pub bound: f64,
}

pub fn bound_report(theorem: u8, n: usize, k: usize, sigma: &Statevector, restarts: usize) -> Result<BoundReport> {
    let h1 = h1_surrogate(sigma, restarts)?;
    let h2 = h2_surrogate(sigma, restarts)?;
    let bound = match theorem {
        1 => theorem1_bound(n, k, h1),
        2 => theorem2_bound(n, k, h2),
        t => return Err(Error::Config { field: "theorem".into(), msg: format!("{t} not in {{1, 2}}") }),
    };
    Ok(BoundReport { theorem, n, k, h1, h2, bound })
}

/// Largest `n` accepted by the surrogates.
pub const MAX_SURROGATE_QUBITS: usize = 8;

fn check_surrogate(sigma: &Statevector) -> Result<()> {
    if sigma.n() > MAX_SURROGATE_QUBITS {
        return Err(Error::SizeGuard { what: "h surrogate", max: MAX_SURROGATE_QUBITS, n: sigma.n() });
    }
    Ok(())
}

fn random_qubit(rng: &mut Rng) -> [C64; 2] {
    let u = crate::haar::sample_haar(rng, 2);
    [u[(0, 0)], u[(1, 0)]]
}

/// `v_q = Σ ψ_x Π_{j≠q} conj(φ_j[x_j])`, indexed by qubit `q`'s bit.
fn partial_overlap(amps: &[C64], n: usize, phis: &[[C64; 2]], q: usize) -> [C64; 2] {
    let mut v = [ZERO; 2];
    for (x, a) in amps.iter().enumerate() {
        let mut w = *a;
        for (j, phi) in phis.iter().enumerate() {
            if j != q {
                w *= phi[(x >> (n - 1 - j)) & 1].conj();
            }
        }
        v[(x >> (n - 1 - q)) & 1] += w;
    }
    v
}

/// Largest `|⟨φ₁⊗…⊗φₙ|ψ⟩|²` found by alternating single-qubit updates.
pub fn max_product_overlap(sigma: &Statevector, restarts: usize, seed: u64) -> f64 {
    let n = sigma.n();
    let amps = sigma.amplitudes();
    let mut best: f64 = 0.0;
    for r in 0..restarts.max(1) {
        let mut rng = substream(seed, r as u64);
        let mut phis: Vec<[C64; 2]> = (0..n).map(|_| random_qubit(&mut rng)).collect();
        let mut last = -1.0;
        for _ in 0..1000 {
            let mut ov = 0.0;
            for q in 0..n {
                let v = partial_overlap(amps, n, &phis, q);
                let nrm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                if nrm > 0.0 {
                    phis[q] = [v[0] / nrm, v[1] / nrm];
                }
                ov = nrm * nrm;
            }
            if (ov - last).abs() < 1e-15 {
                break;
            }
            last = ov;
        }
        best = best.max(last);
    }
    best.min(1.0)
}

/// Upper bound on `h₂`: trace distance `2 sqrt(1 − F)` to the best product
/// pure state found.
pub fn h2_surrogate(sigma: &Statevector, restarts: usize) -> Result<f64> {
    check_surrogate(sigma)?;
    let f = max_product_overlap(sigma, restarts, 0x42);
    Ok(2.0 * (1.0 - f).max(0.0).sqrt())
}

fn l1_amplitudes(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm()).sum()
}

struct QubitRotationCost<'a> {
    state: &'a Statevector,
    q: usize,
}

impl CostFunction for QubitRotationCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let mut s = self.state.clone();
        s.apply_1q(self.q, &crate::circuits::rotation(p[0], p[1], p[2]));
        Ok(l1_amplitudes(s.amplitudes()))
    }
}

fn minimize_qubit(state: &Statevector, q: usize) -> Result<Vec<f64>> {
    let simplex = vec![
        vec![0.0, 0.0, 0.0],
        vec![0.6, 0.0, 0.0],
        vec![0.0, 0.6, 0.0],
        vec![0.0, 0.0, 0.6],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-13)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let res = Executor::new(QubitRotationCost { state, q }, solver)
        .configure(|s| s.max_iters(400))
        .run()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(res.state.best_param.unwrap_or_else(|| vec![0.0; 3]))
}

/// Rotates every qubit so the dominant eigenvector of its reduced state
/// becomes `|0⟩`; exact for product states.
fn align_reduced_states(state: &mut Statevector) {
    let n = state.n();
    for q in 0..n {
        let a = state.amplitudes();
        let mask = crate::linalg::qubit_mask(n, q);
        let (mut r00, mut r11, mut r01) = (0.0, 0.0, ZERO);
        for (x, v) in a.iter().enumerate() {
            if x & mask == 0 {
                r00 += v.norm_sqr();
                r01 += v * a[x | mask].conj();
            } else {
                r11 += v.norm_sqr();
            }
        }
        // dominant eigenvector of [[r00, r01], [r01*, r11]]
        let half = 0.5 * (r00 - r11);
        let lam = 0.5 * (r00 + r11) + (half * half + r01.norm_sqr()).sqrt();
        let (e0, e1) = if r01.norm() > 1e-15 {
            (r01, C64::new(lam - r00, 0.0))
        } else if r00 >= r11 {
            (ONE, ZERO)
        } else {
            (ZERO, ONE)
        };
        let nrm = (e0.norm_sqr() + e1.norm_sqr()).sqrt();
        let (e0, e1) = (e0 / nrm, e1 / nrm);
        // unitary mapping (e0, e1) to |0⟩: rows are ⟨e|, ⟨e⊥|
        let u = [[e0.conj(), e1.conj()], [-e1, e0]];
        state.apply_1q(q, &u);
    }
}

/// Upper bound on `h₁ = min_V ‖σ_V‖₁²` for a pure `σ` over local unitaries
/// `V`; for a pure state `‖σ_V‖₁ = (Σ_x |⟨x|V|ψ⟩|)²`.
pub fn h1_surrogate(sigma: &Statevector, restarts: usize) -> Result<f64> {
    check_surrogate(sigma)?;
    let n = sigma.n();
    let mut best = l1_amplitudes(sigma.amplitudes());
    for r in 0..restarts.max(1) {
        let mut s = sigma.clone();
        if r == 0 {
            align_reduced_states(&mut s);
        } else {
            let mut rng = substream(0x41, r as u64);
            for q in 0..n {
                let u = crate::haar::sample_haar(&mut rng, 2);
                s.apply_1q(q, &crate::linalg::dense_to_mat2(&u));
            }
        }
        let mut cur = l1_amplitudes(s.amplitudes());
        for _ in 0..50 {
            let before = cur;
            for q in 0..n {
                let p = minimize_qubit(&s, q)?;
                let mut t = s.clone();
                t.apply_1q(q, &crate::circuits::rotation(p[0], p[1], p[2]));
                let v = l1_amplitudes(t.amplitudes());
                if v < cur {
                    s = t;
                    cur = v;
                }
            }
            if before - cur < 1e-12 {
                break;
            }
        }
        best = best.min(cur);
    }
    Ok(best.powi(4))
}

/// Bit string tuple `(p, q, r, s)`.
pub type BitTuple = [Vec<u8>; 4];

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

fn haar_windows(n: usize, k: usize, rng: &mut Rng) -> Vec<crate::linalg::ComplexMatrix> {
    (0..=n - k).map(|_| crate::haar::sample_haar(rng, 1 << k)).collect()
}

fn check_tuples(n: usize, tuples: &[BitTuple]) -> Result<()> {
    for t in tuples {
        check_bits(n, [&t[0], &t[1], &t[2], &t[3]])?;
    }
    Ok(())
}

/// Monte-Carlo estimate of [`mu_global`] for each tuple, drawing every
/// subcircuit from the Haar measure. All tuples share the samples.
pub fn mc_mu_global(
    n: usize,
    k: usize,
    tuples: &[BitTuple],
    samples: usize,
    seed: u64,
) -> Result<Vec<crate::stats::Estimate>> {
    check_nk(n, k)?;
    check_tuples(n, tuples)?;
    let idx: Vec<[usize; 4]> = tuples.iter().map(|t| t.each_ref().map(|b| bits_to_index(b))).collect();
    let vals: Vec<Vec<f64>> = crate::rng::map_samples(samples, seed, |rng, _| {
        let us = haar_windows(n, k, rng);
        // C†|0⟩: adjoints of the windows in reverse application order.
        let mut phi = Statevector::zero(n);
        for (start, u) in us.iter().enumerate().rev() {
            phi.apply_window(start, &u.adjoint()).expect("window fits");
        }
        let a = phi.amplitudes();
        idx.iter()
            .map(|[p, q, r, s]| (a[*p].conj() * a[*q] * a[*r].conj() * a[*s]).re)
            .collect()
    });
    Ok(transpose_estimates(&vals, tuples.len()))
}

/// Monte-Carlo estimate of [`mu_z`] for each tuple.
pub fn mc_mu_z(
    n: usize,
    k: usize,
    i: usize,
    tuples: &[BitTuple],
    samples: usize,
    seed: u64,
) -> Result<Vec<crate::stats::Estimate>> {
    check_nk(n, k)?;
    check_tuples(n, tuples)?;
    if i >= n {
        return Err(Error::Dimension(format!("qubit {i} outside 0..{n}")));
    }
    let mut distinct: Vec<usize> = tuples.iter().flat_map(|t| t.iter().map(|b| bits_to_index(b))).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let pos = |x: usize| distinct.binary_search(&x).expect("indexed");
    let idx: Vec<[usize; 4]> = tuples.iter().map(|t| t.each_ref().map(|b| pos(bits_to_index(b)))).collect();
    let zmask = crate::linalg::qubit_mask(n, i);
    let vals: Vec<Vec<f64>> = crate::rng::map_samples(samples, seed, |rng, _| {
        let us = haar_windows(n, k, rng);
        let psis: Vec<Statevector> = distinct
            .iter()
            .map(|&x| {
                let mut psi = Statevector::basis(n, x);
                for (start, u) in us.iter().enumerate() {
                    psi.apply_window(start, u).expect("window fits");
                }
                psi
            })
            .collect();
        // ⟨ψ_b|Z_i|ψ_a⟩
        let zel = |a: usize, b: usize| -> C64 {
            let (x, y) = (psis[a].amplitudes(), psis[b].amplitudes());
            x.iter()
                .zip(y)
                .enumerate()
                .map(|(j, (xa, yb))| if j & zmask == 0 { yb.conj() * xa } else { -yb.conj() * xa })
                .sum()
        };
        idx.iter().map(|[p, q, r, s]| (zel(*p, *q) * zel(*r, *s)).re).collect()
    });
    Ok(transpose_estimates(&vals, tuples.len()))
}

fn transpose_estimates(vals: &[Vec<f64>], cols: usize) -> Vec<crate::stats::Estimate> {
    (0..cols)
        .map(|c| {
            let col: Vec<f64> = vals.iter().map(|v| v[c]).collect();
            crate::stats::Estimate::mean_of(&col)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(n: usize) -> Vec<u8> {
        vec![0; n]
    }

    #[test]
    fn k2_reference_values() {
        let z = zeros(3);
        assert!((mu_global(3, 2, &z, &z, &z, &z).unwrap() - 0.03).abs() < 1e-15);
        let z = zeros(4);
        assert!((mu_global(4, 2, &z, &z, &z, &z).unwrap() - 0.009).abs() < 1e-15);
        assert!((mu_local_zero(3, 2).unwrap() - 0.146_666_666_666_666_67).abs() < 1e-15);
        assert!((mu_local_zero(2, 2).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_recursion() {
        for k in 2..=4 {
            let cf = LocalClosedForm::new(k);
            for n in k..k + 6 {
                let rec = mu_local_zero(n, k).unwrap();
                assert!((cf.value(n, k) - rec).abs() < 1e-14, "n={n} k={k}");
                assert!(rec >= cf.b0);
            }
        }
        assert!((LocalClosedForm::new(2).b0 - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn local_slide_eigenvalues() {
        for k in 2..=4 {
            let ev = TransferMatrix2::new(k, 1.0, 1.0, Contraction::Identity).eigenvalues();
            let x = (1u64 << k) as f64;
            let want = (x * x - 4.0) / (2.0 * (x * x - 1.0));
            assert!((ev[0].re - 1.0).abs() < 1e-14);
            assert!((ev[1].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn bounds() {
        assert!((theorem1_bound(10, 2, 1.0) - 4f64.powi(-7)).abs() < 1e-20);
        assert_eq!(theorem1_bound(10, 2, 0.0), 0.0);
        assert!((theorem2_bound(8, 2, 0.0) - 1.0 / 288.0).abs() < 1e-18);
        assert!(theorem2_bound(8, 2, 1.0 / 18.0).abs() < 1e-18);
        assert!(theorem2_bound(8, 2, 2.0 / 18.0) < 0.0);
    }

    #[test]
    fn surrogates_on_zero_state() {
        let s = Statevector::zero(3);
        assert!((h1_surrogate(&s, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(h2_surrogate(&s, 2).unwrap() < 1e-6);
    }

    #[test]
    fn bad_inputs() {
        assert!(mu_global(3, 1, &zeros(3), &zeros(3), &zeros(3), &zeros(3)).is_err());
        assert!(mu_global(3, 2, &zeros(2), &zeros(3), &zeros(3), &zeros(3)).is_err());
        assert!(h1_surrogate(&Statevector::zero(9), 1).is_err());
    }

    #[test]
    fn monte_carlo_matches_recursion_on_small_cases() {
        let z = vec![0u8; 3];
        let t: BitTuple = [z.clone(), z.clone(), z.clone(), z.clone()];
        let u: BitTuple = [vec![0, 1, 0], vec![0, 1, 0], vec![1, 1, 0], vec![1, 1, 0]];
        let est = mc_mu_global(3, 2, &[t.clone(), u.clone()], 20_000, 9).unwrap();
        for (e, tt) in est.iter().zip([&t, &u]) {
            let exact = mu_global(3, 2, &tt[0], &tt[1], &tt[2], &tt[3]).unwrap();
            assert!(e.within(exact, 4.0), "{e:?} vs {exact}");
        }
        let z4 = vec![0u8; 4];
        let t4: BitTuple = [z4.clone(), z4.clone(), z4.clone(), z4];
        let e = mc_mu_z(4, 2, 3, &[t4], 20_000, 10).unwrap()[0];
        assert!(e.within(mu_local_zero(4, 2).unwrap(), 4.0), "{e:?}");
    }
}
