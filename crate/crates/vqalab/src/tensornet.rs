//! Pauli-basis tensor trains for Heisenberg-evolved observables.
//!
//! Site `i` carries a real core `A_i[a, s, b]` with physical index `s` over
//! the orthonormal single-qubit basis `(I, X, Z, Y)/√2`, so the coefficient
//! of the orthonormal Pauli string `K_{s_1…s_n}` is `A_1[s_1] ⋯ A_n[s_n]`.
//! Evolution conjugates `W → G† W G` gate by gate in reverse application
//! order, which yields `W_{C†} = C† W C`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::circuits::Ansatz;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_deviation, mat2_kron, mat4_adjoint, mat4_mul, swap4, unitary_deviation, ComplexMatrix, Mat4, C64,
};
use crate::observables::Observable;
use crate::pauli::{single_qubit, PauliString};

/// Pivots of the rank-revealing split below this fraction of the largest
/// are treated as zero.
pub const RANK_RELATIVE_CUTOFF: f64 = 1e-12;
/// Largest `n` for full coefficient enumeration from a tensor train.
pub const MAX_TN_ENUMERATION: usize = 10;

#[derive(Debug, Clone, PartialEq)]
struct Core {
    l: usize,
    r: usize,
    data: Vec<f64>,
}

impl Core {
    #[inline]
    fn at(&self, a: usize, s: usize, b: usize) -> f64 {
        self.data[(a * 4 + s) * self.r + b]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliMPS {
    cores: Vec<Core>,
}

/// Orthonormal-Pauli coefficients `tr(P_s F)/√2` of a 2×2 Hermitian.
pub fn single_site_coefficients(f: &ComplexMatrix) -> Result<[f64; 4]> {
    if f.nrows() != 2 || f.ncols() != 2 {
        return Err(Error::Dimension(format!("site factor is {}x{}", f.nrows(), f.ncols())));
    }
    let dev = hermitian_deviation(f);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = [0.0; 4];
    for (code, c) in out.iter_mut().enumerate() {
        let p = single_qubit(code as u8);
        let mut t = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                t += p[i][j] * f[(j, i)];
            }
        }
        *c = t.re * s;
    }
    Ok(out)
}

fn two_qubit_paulis() -> Vec<Mat4> {
    (0..16)
        .map(|s| mat2_kron(&single_qubit((s / 4) as u8), &single_qubit((s % 4) as u8)))
        .collect()
}

/// `R[s', s] = tr(P_{s'} G† P_s G) / 4`: the action of `W → G† W G` on
/// two-site orthonormal coefficients, index `4 s_first + s_second`.
pub fn pauli_transfer(g: &Mat4) -> Result<[[f64; 16]; 16]> {
    let dev = unitary_deviation(&crate::linalg::mat4_to_dense(g));
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let ps = two_qubit_paulis();
    let gd = mat4_adjoint(g);
    let mut r = [[0.0; 16]; 16];
    for s in 0..16 {
        let conj = mat4_mul(&gd, &mat4_mul(&ps[s], g));
        for (sp, p) in ps.iter().enumerate() {
            let mut t = C64::new(0.0, 0.0);
            for i in 0..4 {
                for k in 0..4 {
                    t += p[i][k] * conj[k][i];
                }
            }
            r[sp][s] = 0.25 * t.re;
        }
    }
    Ok(r)
}

/// Per-evolution diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveStats {
    /// Bond dimension across cut `(i, i+1)` after evolution.
    pub bonds: Vec<usize>,
    pub max_bond: usize,
    /// Adjacent two-qubit gates (including routing swaps) across each cut.
    pub gates_per_cut: Vec<usize>,
    /// `R_{V,i}`: gates on `(j, j+1)` with `j <= i <= j+1`.
    pub r_v_sites: Vec<usize>,
    pub r_v: usize,
}

impl PauliMPS {
    pub fn from_product_observable(factors: &[ComplexMatrix]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("no site factors".into()));
        }
        let cores = factors
            .iter()
            .map(|f| Ok(Core { l: 1, r: 1, data: single_site_coefficients(f)?.to_vec() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliMPS { cores })
    }

    pub fn from_observable(w: &Observable, n: usize) -> Result<Self> {
        w.validate(n)?;
        let f = w
            .product_factors(n)
            .ok_or_else(|| Error::Geometry(format!("observable {w} is not a product")))?;
        Self::from_product_observable(&f)
    }

    pub fn n(&self) -> usize {
        self.cores.len()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.n() - 1].iter().map(|c| c.r).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Conjugates by a gate on sites `(i, i+1)`; row/column index of `g` is
    /// `2 x_i + x_{i+1}`.
    pub fn conjugate_gate(&mut self, g: &Mat4, i: usize) -> Result<()> {
        if i + 1 >= self.n() {
            return Err(Error::Dimension(format!("gate site {i} on {} sites", self.n())));
        }
        let r = pauli_transfer(g)?;
        let a = &self.cores[i];
        let b = &self.cores[i + 1];
        let (l, m, rr) = (a.l, a.r, b.r);
        // theta[a, s1, s2, b]
        let mut theta = vec![0.0; l * 16 * rr];
        for x in 0..l {
            for s1 in 0..4 {
                for k in 0..m {
                    let av = a.at(x, s1, k);
                    if av == 0.0 {
                        continue;
                    }
                    for s2 in 0..4 {
                        for y in 0..rr {
                            theta[((x * 4 + s1) * 4 + s2) * rr + y] += av * b.at(k, s2, y);
                        }
                    }
                }
            }
        }
        let mut mat = DMatrix::<f64>::zeros(l * 4, 4 * rr);
        for x in 0..l {
            for y in 0..rr {
                let mut v = [0.0; 16];
                for (s, vs) in v.iter_mut().enumerate() {
                    *vs = theta[(x * 16 + s) * rr + y];
                }
                for sp in 0..16 {
                    let val: f64 = (0..16).map(|s| r[sp][s] * v[s]).sum();
                    mat[(x * 4 + sp / 4, (sp % 4) * rr + y)] = val;
                }
            }
        }
        // column-pivoted Householder QR: exact and rank revealing, also for
        // the exactly rank-deficient splits that Pauli-basis trains produce
        let (rows, cols) = mat.shape();
        let qr = mat.col_piv_qr();
        let q = qr.q();
        let mut rmat = qr.r();
        let pivots: Vec<f64> = (0..rows.min(cols)).map(|j| rmat[(j, j)].abs()).collect();
        qr.p().inv_permute_columns(&mut rmat);
        let rmax = pivots.iter().copied().fold(0.0, f64::max);
        let rk = pivots.iter().filter(|&&d| d > RANK_RELATIVE_CUTOFF * rmax).count().max(1);
        let mut left = vec![0.0; l * 4 * rk];
        for row in 0..rows {
            for c in 0..rk {
                left[row * rk + c] = q[(row, c)];
            }
        }
        let mut right = vec![0.0; rk * cols];
        for c in 0..rk {
            for col in 0..cols {
                right[c * cols + col] = rmat[(c, col)];
            }
        }
        self.cores[i] = Core { l, r: rk, data: left };
        self.cores[i + 1] = Core { l: rk, r: rr, data: right };
        Ok(())
    }

    /// Conjugates by a gate on sites `(a, b)`, which must be neighbours.
    pub fn conjugate_gate_on(&mut self, g: &Mat4, a: usize, b: usize) -> Result<()> {
        if b != a + 1 {
            return Err(Error::NonAdjacent(a, b));
        }
        self.conjugate_gate(g, a)
    }

    /// `Σ_K tr(K W)²`.
    pub fn two_norm_sqr(&self) -> f64 {
        let mut env = vec![1.0];
        let mut dim = 1;
        for c in &self.cores {
            let mut next = vec![0.0; c.r * c.r];
            for a in 0..dim {
                for a2 in 0..dim {
                    let e = env[a * dim + a2];
                    if e == 0.0 {
                        continue;
                    }
                    for s in 0..4 {
                        for b in 0..c.r {
                            let x = e * c.at(a, s, b);
                            for b2 in 0..c.r {
                                next[b * c.r + b2] += x * c.at(a2, s, b2);
                            }
                        }
                    }
                }
            }
            env = next;
            dim = c.r;
        }
        env[0]
    }

    /// `Σ_K tr(K W)⁴` by contracting the Hadamard self-product with itself.
    pub fn fourth_power_sum(&self) -> f64 {
        // env indexed [a1, a2, a3, a4]
        let mut env = vec![1.0];
        let mut d = 1;
        for c in &self.cores {
            let r = c.r;
            let mut next = vec![0.0; r * r * r * r];
            for s in 0..4 {
                // contract one leg at a time: t1[b1, a2, a3, a4] = Σ_{a1} A[a1,s,b1] env[a1,a2,a3,a4]
                let mut t1 = vec![0.0; r * d * d * d];
                for a1 in 0..d {
                    for b1 in 0..r {
                        let w = c.at(a1, s, b1);
                        if w == 0.0 {
                            continue;
                        }
                        let src = &env[a1 * d * d * d..(a1 + 1) * d * d * d];
                        let dst = &mut t1[b1 * d * d * d..(b1 + 1) * d * d * d];
                        for (x, y) in dst.iter_mut().zip(src) {
                            *x += w * y;
                        }
                    }
                }
                // t2[b1, b2, a3, a4]
                let mut t2 = vec![0.0; r * r * d * d];
                for b1 in 0..r {
                    for a2 in 0..d {
                        for b2 in 0..r {
                            let w = c.at(a2, s, b2);
                            if w == 0.0 {
                                continue;
                            }
                            let src = &t1[(b1 * d + a2) * d * d..(b1 * d + a2 + 1) * d * d];
                            let dst = &mut t2[(b1 * r + b2) * d * d..(b1 * r + b2 + 1) * d * d];
                            for (x, y) in dst.iter_mut().zip(src) {
                                *x += w * y;
                            }
                        }
                    }
                }
                // t3[b1, b2, b3, a4]
                let mut t3 = vec![0.0; r * r * r * d];
                for p in 0..r * r {
                    for a3 in 0..d {
                        for b3 in 0..r {
                            let w = c.at(a3, s, b3);
                            if w == 0.0 {
                                continue;
                            }
                            let src = &t2[(p * d + a3) * d..(p * d + a3 + 1) * d];
                            let dst = &mut t3[(p * r + b3) * d..(p * r + b3 + 1) * d];
                            for (x, y) in dst.iter_mut().zip(src) {
                                *x += w * y;
                            }
                        }
                    }
                }
                for p in 0..r * r * r {
                    for a4 in 0..d {
                        let v = t3[p * d + a4];
                        if v == 0.0 {
                            continue;
                        }
                        for b4 in 0..r {
                            next[p * r + b4] += v * c.at(a4, s, b4);
                        }
                    }
                }
            }
            env = next;
            d = r;
        }
        env[0]
    }

    /// `‖W‖_𝕂 = (Σ c⁴)^{1/4} / ‖W‖₂`.
    pub fn k_norm(&self, w_two_norm: f64) -> Result<f64> {
        if w_two_norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.fourth_power_sum().max(0.0).powf(0.25) / w_two_norm)
    }

    /// `tr(K_p W)` by one-hot contraction.
    pub fn coefficient(&self, p: &PauliString) -> Result<f64> {
        if p.n() != self.n() {
            return Err(Error::Dimension(format!("{}-qubit string on {} sites", p.n(), self.n())));
        }
        let mut v = vec![1.0];
        for (c, &s) in self.cores.iter().zip(p.digits()) {
            let mut next = vec![0.0; c.r];
            for (a, va) in v.iter().enumerate() {
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += va * c.at(a, s as usize, b);
                }
            }
            v = next;
        }
        Ok(v[0])
    }

    /// Every coefficient in enumeration order.
    pub fn all_coefficients(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > MAX_TN_ENUMERATION {
            return Err(Error::SizeGuard { what: "tensor-train enumeration", max: MAX_TN_ENUMERATION, n });
        }
        // rows: strings over the sites so far, cols: right bond
        let mut acc = vec![1.0];
        let mut rows = 1;
        let mut bond = 1;
        for c in &self.cores {
            let mut next = vec![0.0; rows * 4 * c.r];
            for row in 0..rows {
                for a in 0..bond {
                    let v = acc[row * bond + a];
                    if v == 0.0 {
                        continue;
                    }
                    for s in 0..4 {
                        for b in 0..c.r {
                            next[(row * 4 + s) * c.r + b] += v * c.at(a, s, b);
                        }
                    }
                }
            }
            acc = next;
            rows *= 4;
            bond = c.r;
        }
        Ok(acc)
    }
}

/// Nearest-neighbour gate sequence (site `i` means sites `(i, i+1)`) that
/// realizes the ansatz; long-range blocks are routed through swaps.
pub fn routed_gates(ansatz: &Ansatz, theta: &[f64]) -> Result<Vec<(usize, Mat4)>> {
    let mut out = Vec::new();
    for (a, b, u) in ansatz.block_unitaries(theta)? {
        let (lo, hi) = (a.min(b), a.max(b));
        if a > b {
            return Err(Error::Geometry(format!("block ({a}, {b}) must have a < b")));
        }
        // swaps carry qubit `hi` down to `lo + 1`, gate, then swap back
        for s in (lo + 1..hi).rev() {
            out.push((s, swap4()));
        }
        out.push((lo, u));
        for s in lo + 1..hi {
            out.push((s, swap4()));
        }
    }
    Ok(out)
}

/// `R_{V,i}` and gates-per-cut for a routed gate list on `n` sites.
pub fn gate_counts(n: usize, gates: &[(usize, Mat4)]) -> (Vec<usize>, Vec<usize>) {
    let mut per_cut = vec![0; n.saturating_sub(1)];
    for (s, _) in gates {
        per_cut[*s] += 1;
    }
    let sites = (0..n)
        .map(|i| {
            let left = if i > 0 { per_cut[i - 1] } else { 0 };
            let right = if i + 1 < n { per_cut[i] } else { 0 };
            left + right
        })
        .collect();
    (per_cut, sites)
}

/// `C(θ)† W C(θ)` as a tensor train.
pub fn heisenberg_evolve(w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> Result<(PauliMPS, EvolveStats)> {
    let n = ansatz.n();
    let mut mps = PauliMPS::from_observable(w, n)?;
    let norm0 = mps.two_norm_sqr();
    let gates = routed_gates(ansatz, theta)?;
    // a gate applied first on the state is conjugated last
    for (site, g) in gates.iter().rev() {
        mps.conjugate_gate(g, *site)?;
        let nrm = mps.two_norm_sqr();
        if (nrm - norm0).abs() > 1e-9 * norm0.max(1.0) {
            return Err(Error::Numerical(format!("2-norm drifted from {norm0} to {nrm}")));
        }
    }
    let (gates_per_cut, r_v_sites) = gate_counts(n, &gates);
    let r_v = r_v_sites.iter().copied().max().unwrap_or(0);
    let bonds = mps.bond_dims();
    let max_bond = mps.max_bond();
    Ok((mps, EvolveStats { bonds, max_bond, gates_per_cut, r_v_sites, r_v }))
}

/// `‖W‖₂` of a product observable (invariant under conjugation).
pub fn product_two_norm(w: &Observable, n: usize) -> Result<f64> {
    Ok(PauliMPS::from_observable(w, n)?.two_norm_sqr().sqrt())
}
