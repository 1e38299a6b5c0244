//! MPS, HEA and QCNN ansatzes built from a common two-qubit block.
//!
//! A block on qubits `(a, b)`, `a < b`, applies one Euler rotation to each
//! qubit and then a CNOT with control `a`. Each rotation carries three
//! angles `(θ, φ, λ)` and realizes `R_z(φ) R_y(θ) R_z(λ)` with
//! `R_P(x) = exp(-i x P / 2)`, so a block owns six parameters in the order
//! `(θ_a, φ_a, λ_a, θ_b, φ_b, λ_b)`.
//!
//! Application order for the MPS ansatz: the operator product is
//! `C = A^(1) A^(2) ... A^(T)`, so `U_T` (window on qubits `0..k`) acts on
//! the state first and `U_1` (the last `k` qubits) acts last. The parameter
//! vector is `θ_1 ⊕ θ_2 ⊕ ... ⊕ θ_T`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cnot4, mat2_kron, mat2_mul, mat4_mul, ComplexMatrix, Mat2, Mat4, Statevector, C64, ZERO,
};

pub const PARAMS_PER_ROTATION: usize = 3;
pub const PARAMS_PER_BLOCK: usize = 6;
/// Dense unitaries are built only up to this many qubits.
pub const MAX_DENSE_QUBITS: usize = 12;

pub fn rz(x: f64) -> Mat2 {
    let h = 0.5 * x;
    [
        [C64::from_polar(1.0, -h), ZERO],
        [ZERO, C64::from_polar(1.0, h)],
    ]
}

pub fn ry(x: f64) -> Mat2 {
    let (s, c) = (0.5 * x).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

/// `R_z(φ) R_y(θ) R_z(λ)`.
pub fn rotation(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    mat2_mul(&rz(phi), &mat2_mul(&ry(theta), &rz(lambda)))
}

/// `CNOT (R_a ⊗ R_b)` for a six-angle block.
pub fn block_unitary(p: &[f64]) -> Mat4 {
    let ra = rotation(p[0], p[1], p[2]);
    let rb = rotation(p[3], p[4], p[5]);
    mat4_mul(&cnot4(), &mat2_kron(&ra, &rb))
}

fn adjoint2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Mps,
    Hea,
    Qcnn,
}

/// Width and depth of the brickwork used for every subcircuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcircuitTemplate {
    pub width: usize,
    pub depth: usize,
}

impl SubcircuitTemplate {
    /// Brickwork pairs over an ordered qubit list. Layer `l` starts at
    /// offset `l mod 2`; a two-qubit list has a single block per layer.
    pub fn pairs(qubits: &[usize], depth: usize) -> Vec<(usize, usize)> {
        let w = qubits.len();
        let mut out = Vec::new();
        for l in 0..depth {
            let start = if w > 2 { l % 2 } else { 0 };
            let mut i = start;
            while i + 1 < w {
                out.push((qubits[i], qubits[i + 1]));
                i += 2;
            }
        }
        out
    }

    pub fn block_count(&self) -> usize {
        let qubits: Vec<usize> = (0..self.width).collect();
        Self::pairs(&qubits, self.depth).len()
    }

    pub fn param_count(&self) -> usize {
        PARAMS_PER_BLOCK * self.block_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub a: usize,
    pub b: usize,
    pub param_offset: usize,
    pub subcircuit: usize,
}

/// One parameter group of the ansatz with the qubits it touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub qubits: Vec<usize>,
    pub param_offset: usize,
    pub param_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    kind: AnsatzKind,
    n: usize,
    k: usize,
    depth: usize,
    windows: Vec<Window>,
    blocks: Vec<Block>,
    num_params: usize,
}

impl Ansatz {
    /// Cascade of `T = n - k + 1` width-`k` subcircuits of the given depth.
    pub fn mps(n: usize, k: usize, depth: usize) -> Result<Self> {
        if k < 2 || k > n {
            return Err(Error::Geometry(format!("MPS needs 2 <= k <= n, got k={k}, n={n}")));
        }
        let t = n - k + 1;
        let template = SubcircuitTemplate { width: k, depth };
        let per = template.param_count();
        let windows: Vec<Window> = (1..=t)
            .map(|p| {
                let start = n - k + 1 - p;
                Window {
                    qubits: (start..start + k).collect(),
                    param_offset: (p - 1) * per,
                    param_count: per,
                }
            })
            .collect();
        let mut blocks = Vec::new();
        for p in (1..=t).rev() {
            let w = &windows[p - 1];
            for (j, (a, b)) in SubcircuitTemplate::pairs(&w.qubits, depth).into_iter().enumerate() {
                blocks.push(Block {
                    a,
                    b,
                    param_offset: w.param_offset + j * PARAMS_PER_BLOCK,
                    subcircuit: p,
                });
            }
        }
        Ok(Ansatz { kind: AnsatzKind::Mps, n, k, depth, windows, blocks, num_params: t * per })
    }

    /// Brickwork over all `n` qubits.
    pub fn hea(n: usize, depth: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Geometry(format!("HEA needs n >= 2, got {n}")));
        }
        let qubits: Vec<usize> = (0..n).collect();
        let blocks: Vec<Block> = SubcircuitTemplate::pairs(&qubits, depth)
            .into_iter()
            .enumerate()
            .map(|(j, (a, b))| Block { a, b, param_offset: j * PARAMS_PER_BLOCK, subcircuit: 1 })
            .collect();
        let num_params = blocks.len() * PARAMS_PER_BLOCK;
        let windows = vec![Window { qubits, param_offset: 0, param_count: num_params }];
        Ok(Ansatz { kind: AnsatzKind::Hea, n, k: n, depth, windows, blocks, num_params })
    }

    /// Measurement-free QCNN: each stage runs a depth-`depth` brickwork on
    /// the active qubits, then pools pairs `(a_{2j}, a_{2j+1})` with one
    /// block and drops `a_{2j}`. The last qubit survives all stages.
    pub fn qcnn(n: usize, depth: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Geometry(format!("QCNN needs n a power of two >= 2, got {n}")));
        }
        let mut active: Vec<usize> = (0..n).collect();
        let mut windows = Vec::new();
        let mut blocks = Vec::new();
        let mut offset = 0;
        let mut stage = 0;
        while active.len() > 1 {
            stage += 1;
            let start = offset;
            let mut pairs = SubcircuitTemplate::pairs(&active, depth);
            pairs.extend(active.chunks(2).map(|c| (c[0], c[1])));
            for (a, b) in pairs {
                blocks.push(Block { a, b, param_offset: offset, subcircuit: stage });
                offset += PARAMS_PER_BLOCK;
            }
            windows.push(Window {
                qubits: active.clone(),
                param_offset: start,
                param_count: offset - start,
            });
            active = active.chunks(2).map(|c| c[1]).collect();
        }
        Ok(Ansatz { kind: AnsatzKind::Qcnn, n, k: n, depth, windows, blocks, num_params: offset })
    }

    pub fn kind(&self) -> AnsatzKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Subcircuit width for MPS; `n` for the other kinds.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// Parameter groups in θ order (`θ_1` first for MPS).
    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    /// Blocks in the order they act on the state.
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Flat index of parameter `q` inside group `p` (1-based `p`).
    pub fn param_index(&self, p: usize, q: usize) -> Result<usize> {
        let w = p
            .checked_sub(1)
            .and_then(|i| self.windows.get(i))
            .ok_or(Error::ParamIndex { index: p, len: self.windows.len() })?;
        if q >= w.param_count {
            return Err(Error::ParamIndex { index: q, len: w.param_count });
        }
        Ok(w.param_offset + q)
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params {
            return Err(Error::ParamLength { expected: self.num_params, got: theta.len() });
        }
        Ok(())
    }

    pub fn random_params(&self, rng: &mut crate::rng::Rng) -> Vec<f64> {
        (0..self.num_params)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect()
    }

    /// `(a, b, U)` for every block in application order.
    pub fn block_unitaries(&self, theta: &[f64]) -> Result<Vec<(usize, usize, Mat4)>> {
        self.check_params(theta)?;
        Ok(self
            .blocks
            .iter()
            .map(|bl| (bl.a, bl.b, block_unitary(&theta[bl.param_offset..bl.param_offset + 6])))
            .collect())
    }

    pub fn apply_in_place(&self, theta: &[f64], psi: &mut Statevector) -> Result<()> {
        self.check_params(theta)?;
        if psi.n() != self.n {
            return Err(Error::Dimension(format!(
                "{}-qubit state for a {}-qubit ansatz",
                psi.n(),
                self.n
            )));
        }
        for bl in &self.blocks {
            let p = &theta[bl.param_offset..bl.param_offset + 6];
            psi.apply_1q(bl.a, &rotation(p[0], p[1], p[2]));
            psi.apply_1q(bl.b, &rotation(p[3], p[4], p[5]));
            psi.apply_cnot(bl.a, bl.b);
        }
        Ok(())
    }

    /// `C(θ)†|ψ⟩`.
    pub fn apply_adjoint(&self, theta: &[f64], psi: &Statevector) -> Result<Statevector> {
        self.check_params(theta)?;
        if psi.n() != self.n {
            return Err(Error::Dimension(format!(
                "{}-qubit state for a {}-qubit ansatz",
                psi.n(),
                self.n
            )));
        }
        let mut out = psi.clone();
        for bl in self.blocks.iter().rev() {
            let p = &theta[bl.param_offset..bl.param_offset + 6];
            out.apply_cnot(bl.a, bl.b);
            out.apply_1q(bl.a, &adjoint2(&rotation(p[0], p[1], p[2])));
            out.apply_1q(bl.b, &adjoint2(&rotation(p[3], p[4], p[5])));
        }
        Ok(out)
    }

    /// `C(θ)|ψ⟩`.
    pub fn apply(&self, theta: &[f64], psi: &Statevector) -> Result<Statevector> {
        let mut out = psi.clone();
        self.apply_in_place(theta, &mut out)?;
        Ok(out)
    }

    pub fn dense_unitary(&self, theta: &[f64]) -> Result<ComplexMatrix> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::SizeGuard { what: "dense_unitary", max: MAX_DENSE_QUBITS, n: self.n });
        }
        self.check_params(theta)?;
        let dim = 1usize << self.n;
        let mut u = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let out = self.apply(theta, &Statevector::basis(self.n, col))?;
            for (row, a) in out.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// Number of blocks touching a qubit range that contains site `i`,
    /// counting each block on `(j, k)` with `j <= i <= k`.
    pub fn gates_spanning(&self, i: usize) -> usize {
        self.blocks.iter().filter(|b| b.a.min(b.b) <= i && i <= b.a.max(b.b)).count()
    }
}
