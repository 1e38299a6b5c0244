//! Pauli strings and coefficients in the orthonormal basis `P / 2^{n/2}`.
//!
//! Digit codes: 0 = I, 1 = X, 2 = Z, 3 = Y. Enumeration is lexicographic in
//! the base-4 digits with qubit 0 (text position 1) most significant.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, ComplexMatrix, Mat2, C64, I, ONE, ZERO};

/// Largest `n` for which a dense `2^n x 2^n` Pauli matrix is built.
pub const MAX_DENSE_PAULI: usize = 14;
/// Largest `n` for which all `4^n` coefficients are enumerated.
pub const MAX_ENUMERATION: usize = 10;

const LETTERS: [char; 4] = ['I', 'X', 'Z', 'Y'];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    digits: Vec<u8>,
}

impl PauliString {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d > 3) {
            return Err(Error::Parse(format!("Pauli digit {d} outside 0..=3")));
        }
        Ok(PauliString { digits })
    }

    pub fn identity(n: usize) -> Self {
        PauliString { digits: vec![0; n] }
    }

    /// Single non-identity factor `code` on qubit `q`.
    pub fn single(n: usize, q: usize, code: u8) -> Result<Self> {
        if q >= n {
            return Err(Error::Dimension(format!("qubit {q} out of range for n={n}")));
        }
        let mut digits = vec![0; n];
        digits[q] = code;
        PauliString::new(digits)
    }

    pub fn z(n: usize, q: usize) -> Self {
        PauliString::single(n, q, 2).expect("qubit in range")
    }

    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut digits = vec![0u8; n];
        for d in digits.iter_mut().rev() {
            *d = (index & 3) as u8;
            index >>= 2;
        }
        PauliString { digits }
    }

    pub fn index(&self) -> usize {
        self.digits.iter().fold(0, |acc, &d| (acc << 2) | d as usize)
    }

    pub fn n(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn weight(&self) -> usize {
        self.digits.iter().filter(|&&d| d != 0).count()
    }

    /// All `4^n` strings in enumeration order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    /// Bit mask of the qubits flipped by X/Y factors.
    pub fn flip_mask(&self) -> usize {
        let n = self.n();
        self.digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 1 || d == 3)
            .fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// `⟨x|P|x ⊕ flip_mask⟩`.
    pub fn phase(&self, x: usize) -> C64 {
        let n = self.n();
        let mut ph = ONE;
        for (q, &d) in self.digits.iter().enumerate() {
            let bit = (x >> (n - 1 - q)) & 1;
            match d {
                2 if bit == 1 => ph = -ph,
                3 => ph *= if bit == 0 { -I } else { I },
                _ => {}
            }
        }
        ph
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let n = self.n();
        if n > MAX_DENSE_PAULI {
            return Err(Error::SizeGuard { what: "pauli_matrix", max: MAX_DENSE_PAULI, n });
        }
        let dim = 1usize << n;
        let f = self.flip_mask();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for x in 0..dim {
            m[(x, x ^ f)] = self.phase(x);
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.digits {
            write!(f, "{}", LETTERS[d as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let digits = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(0),
                'X' => Ok(1),
                'Z' => Ok(2),
                'Y' => Ok(3),
                other => Err(Error::Parse(format!("unknown Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(PauliString { digits })
    }
}

pub fn single_qubit(code: u8) -> Mat2 {
    match code {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => [[ZERO, -I], [I, ZERO]],
    }
}

fn qubit_count(w: &ComplexMatrix) -> Result<usize> {
    let d = w.nrows();
    if !w.is_square() || d < 2 || !d.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "expected a 2^n x 2^n matrix, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

fn require_hermitian(w: &ComplexMatrix) -> Result<()> {
    let dev = hermitian_deviation(w);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// `tr(K W)` with `K = P / 2^{n/2}`.
pub fn pauli_coefficient(w: &ComplexMatrix, p: &PauliString) -> Result<f64> {
    let n = qubit_count(w)?;
    if p.n() != n {
        return Err(Error::Dimension(format!("{}-qubit string against {n}-qubit matrix", p.n())));
    }
    require_hermitian(w)?;
    let f = p.flip_mask();
    let tr: C64 = (0..1usize << n).map(|x| p.phase(x) * w[(x ^ f, x)]).sum();
    Ok(tr.re * 2f64.powf(-(n as f64) / 2.0))
}

/// Complex coefficients `tr(P W) / 2^{n/2}` for every string, in enumeration order.
pub fn all_coefficients_complex(w: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = qubit_count(w)?;
    if n > MAX_ENUMERATION {
        return Err(Error::SizeGuard { what: "pauli enumeration", max: MAX_ENUMERATION, n });
    }
    let dim = 1usize << n;
    let mut t = vec![ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            t[interleave(r, c, n)] = w[(r, c)];
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for q in 0..n {
        let stride = 1usize << (2 * (n - 1 - q));
        let len = t.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let v00 = t[i];
                let v01 = t[i + stride];
                let v10 = t[i + 2 * stride];
                let v11 = t[i + 3 * stride];
                t[i] = (v00 + v11) * s;
                t[i + stride] = (v01 + v10) * s;
                t[i + 2 * stride] = (v00 - v11) * s;
                t[i + 3 * stride] = (v01 - v10) * I * s;
            }
            base += 4 * stride;
        }
    }
    Ok(t)
}

/// Real coefficients `tr(K W)` of a Hermitian matrix.
pub fn all_coefficients(w: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(w)?;
    Ok(all_coefficients_complex(w)?.into_iter().map(|z| z.re).collect())
}

fn interleave(r: usize, c: usize, n: usize) -> usize {
    let mut out = 0;
    for q in 0..n {
        let b = n - 1 - q;
        let pair = (((r >> b) & 1) << 1) | ((c >> b) & 1);
        out |= pair << (2 * b);
    }
    out
}

/// `(Σ c^4)^{1/4}`: the fourth-power kernel without the 2-norm normalization.
pub fn l4_kernel(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c.powi(4)).sum::<f64>().powf(0.25)
}

/// `(Σ c^4)^{1/4} / (Σ c^2)^{1/2}`.
pub fn k_norm_from_coefficients(coeffs: &[f64]) -> Result<f64> {
    let two = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if two == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(l4_kernel(coeffs) / two)
}

pub fn k_norm_dense(w: &ComplexMatrix) -> Result<f64> {
    k_norm_from_coefficients(&all_coefficients(w)?)
}

/// Probabilities `c_j^2 / ||W||_2^2` over all strings.
pub fn distribution(coeffs: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(coeffs.iter().map(|c| c * c / total).collect())
}
