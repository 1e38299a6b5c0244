//! Dense complex kernels.
//!
//! Bit-order convention used everywhere in the crate: qubits are numbered
//! `0..n` internally (qubit 1 of the text notation is index 0) and qubit 0
//! is the most-significant bit of a basis index. A basis string `b_0 b_1 ...`
//! therefore reads left to right exactly like its binary index.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Bit mask of qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn entrywise_one_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm()).sum()
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "trace norm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let sv = a
        .clone()
        .try_svd(false, false, 1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?
        .singular_values;
    Ok(sv.iter().sum())
}

pub fn hermitian_deviation(a: &ComplexMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_square() && hermitian_deviation(a) < tol
}

pub fn unitary_deviation(u: &ComplexMatrix) -> f64 {
    let d = u.adjoint() * u - ComplexMatrix::identity(u.nrows(), u.ncols());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let dev = hermitian_deviation(a);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let mut ev: Vec<f64> = a
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

pub fn mat2_to_dense(m: &Mat2) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| m[i][j])
}

pub fn mat4_to_dense(m: &Mat4) -> ComplexMatrix {
    ComplexMatrix::from_fn(4, 4, |i, j| m[i][j])
}

pub fn dense_to_mat2(m: &ComplexMatrix) -> Mat2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn dense_to_mat4(m: &ComplexMatrix) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    out
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = ZERO;
            for k in 0..4 {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub fn mat4_adjoint(a: &Mat4) -> Mat4 {
    let mut c = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

/// `a ⊗ b` with `a` on the first (more significant) qubit.
pub fn mat2_kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut c = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = a[i >> 1][j >> 1] * b[i & 1][j & 1];
        }
    }
    c
}

/// CNOT with control on the first qubit of the pair.
pub fn cnot4() -> Mat4 {
    let mut c = [[ZERO; 4]; 4];
    c[0][0] = ONE;
    c[1][1] = ONE;
    c[2][3] = ONE;
    c[3][2] = ONE;
    c
}

pub fn swap4() -> Mat4 {
    let mut c = [[ZERO; 4]; 4];
    c[0][0] = ONE;
    c[1][2] = ONE;
    c[2][1] = ONE;
    c[3][3] = ONE;
    c
}

/// Pure-state amplitudes over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
}

impl Statevector {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Statevector { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Statevector { n, amps }
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let n = len.trailing_zeros() as usize;
        Ok(Statevector {
            n,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![ONE];
        for q in qubits {
            let nrm = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
            if nrm == 0.0 {
                return Err(Error::ZeroNorm);
            }
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * q[0] / nrm);
                next.push(a * q[1] / nrm);
            }
            amps = next;
        }
        Statevector::from_amplitudes(amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Probability that qubit `q` reads 0.
    pub fn prob_zero(&self, q: usize) -> f64 {
        let m = qubit_mask(self.n, q);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let s = qubit_mask(self.n, q);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i0 in base..base + s {
                let i1 = i0 | s;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * s;
        }
    }

    /// Two-qubit gate; row/column index of `m` is `2*x_a + x_b`.
    pub fn apply_2q(&mut self, a: usize, b: usize, m: &Mat4) {
        let ma = qubit_mask(self.n, a);
        let mb = qubit_mask(self.n, b);
        for i in 0..self.amps.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let v = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for r in 0..4 {
                self.amps[idx[r]] =
                    m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let mc = qubit_mask(self.n, control);
        let mt = qubit_mask(self.n, target);
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                self.amps.swap(i, i | mt);
            }
        }
    }

    /// Dense gate on the contiguous qubits `start..start + k`, where `u` is
    /// `2^k x 2^k` with `start` as its most significant qubit.
    pub fn apply_window(&mut self, start: usize, u: &ComplexMatrix) -> Result<()> {
        let d = u.nrows();
        let k = d.trailing_zeros() as usize;
        if !u.is_square() || !d.is_power_of_two() || start + k > self.n {
            return Err(Error::Dimension(format!(
                "{}x{} window at qubit {start} on {} qubits",
                u.nrows(),
                u.ncols(),
                self.n
            )));
        }
        let low = self.n - start - k;
        let stride = 1usize << low;
        let mut buf = vec![ZERO; d];
        for hi in 0..1usize << start {
            for lo in 0..stride {
                let base = (hi << (k + low)) | lo;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = self.amps[base | (j << low)];
                }
                for i in 0..d {
                    let mut acc = ZERO;
                    for (j, b) in buf.iter().enumerate() {
                        acc += u[(i, j)] * b;
                    }
                    self.amps[base | (i << low)] = acc;
                }
            }
        }
        Ok(())
    }

    pub fn apply_dense(&self, u: &ComplexMatrix) -> Result<Statevector> {
        if u.ncols() != self.amps.len() || u.nrows() != self.amps.len() {
            return Err(Error::Dimension(format!(
                "{}x{} operator on {} amplitudes",
                u.nrows(),
                u.ncols(),
                self.amps.len()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        Ok(Statevector {
            n: self.n,
            amps: (u * v).iter().copied().collect(),
        })
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        let d = self.amps.len();
        ComplexMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj())
    }
}
