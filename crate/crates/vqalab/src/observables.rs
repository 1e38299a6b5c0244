//! Observables, the objective `f(θ) = tr(W σ_{C(θ)})` and its gradients.
//!
//! Every circuit parameter is a rotation angle with generator `P/2`, so the
//! exact derivative is `(f(θ + π/2) - f(θ - π/2)) / 2`.

use std::fmt;
use std::str::FromStr;

use crate::circuits::Ansatz;
use crate::error::{Error, Result};
use crate::linalg::{mat2_to_dense, ComplexMatrix, Statevector, C64};
use crate::pauli::{single_qubit, PauliString};

/// Observable with 0-based qubit indices. Text forms use 1-based qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `|0…0⟩⟨0…0|`.
    GlobalZero,
    /// `(1/n) Σ_i |0⟩⟨0|_i`.
    LocalAverage,
    Proj0(usize),
    /// `Z` on one qubit.
    ZString(usize),
    Pauli(PauliString),
}

impl Observable {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Observable::Proj0(i) | Observable::ZString(i) if *i >= n => Err(Error::Dimension(
                format!("observable qubit {} outside 1..={n}", i + 1),
            )),
            Observable::Pauli(p) if p.n() != n => Err(Error::Dimension(format!(
                "{}-qubit Pauli string on {n} qubits",
                p.n()
            ))),
            _ => Ok(()),
        }
    }

    /// Expectation in a state that has already been evolved.
    pub fn expectation_in(&self, state: &Statevector) -> Result<f64> {
        let n = state.n();
        self.validate(n)?;
        Ok(match self {
            Observable::GlobalZero => state.amplitudes()[0].norm_sqr(),
            Observable::LocalAverage => (0..n).map(|q| state.prob_zero(q)).sum::<f64>() / n as f64,
            Observable::Proj0(i) => state.prob_zero(*i),
            Observable::ZString(i) => 2.0 * state.prob_zero(*i) - 1.0,
            Observable::Pauli(p) => {
                let f = p.flip_mask();
                let a = state.amplitudes();
                let s: C64 = (0..a.len()).map(|x| a[x].conj() * p.phase(x) * a[x ^ f]).sum();
                s.re
            }
        })
    }

    /// Tensor factors when the observable is a product (`None` for sums).
    pub fn product_factors(&self, n: usize) -> Option<Vec<ComplexMatrix>> {
        let id = ComplexMatrix::identity(2, 2);
        let mut p0 = ComplexMatrix::zeros(2, 2);
        p0[(0, 0)] = C64::new(1.0, 0.0);
        let z = mat2_to_dense(&single_qubit(2));
        match self {
            Observable::GlobalZero => Some(vec![p0; n]),
            Observable::LocalAverage => None,
            Observable::Proj0(i) => Some((0..n).map(|q| if q == *i { p0.clone() } else { id.clone() }).collect()),
            Observable::ZString(i) => Some((0..n).map(|q| if q == *i { z.clone() } else { id.clone() }).collect()),
            Observable::Pauli(p) => Some(p.digits().iter().map(|&d| mat2_to_dense(&single_qubit(d))).collect()),
        }
    }

    pub fn dense(&self, n: usize) -> Result<ComplexMatrix> {
        self.validate(n)?;
        if n > crate::circuits::MAX_DENSE_QUBITS {
            return Err(Error::SizeGuard { what: "dense observable", max: crate::circuits::MAX_DENSE_QUBITS, n });
        }
        match self.product_factors(n) {
            Some(f) => Ok(crate::linalg::kron_all(&f)),
            None => {
                let dim = 1usize << n;
                let mut m = ComplexMatrix::zeros(dim, dim);
                for x in 0..dim {
                    let zeros = n - x.count_ones() as usize;
                    m[(x, x)] = C64::new(zeros as f64 / n as f64, 0.0);
                }
                Ok(m)
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::GlobalZero => write!(f, "global0"),
            Observable::LocalAverage => write!(f, "local-avg"),
            Observable::Proj0(i) => write!(f, "proj0:{}", i + 1),
            Observable::ZString(i) => write!(f, "z:{}", i + 1),
            Observable::Pauli(p) => write!(f, "pauli:{p}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let qubit = |v: &str| -> Result<usize> {
            let i: usize = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad qubit index '{v}' in observable '{s}'")))?;
            i.checked_sub(1)
                .ok_or_else(|| Error::Parse(format!("qubit indices are 1-based, got 0 in '{s}'")))
        };
        match s.split_once(':') {
            None if s == "global0" => Ok(Observable::GlobalZero),
            None if s == "local-avg" => Ok(Observable::LocalAverage),
            Some(("z", v)) => Ok(Observable::ZString(qubit(v)?)),
            Some(("proj0", v)) => Ok(Observable::Proj0(qubit(v)?)),
            Some(("pauli", v)) => Ok(Observable::Pauli(v.parse()?)),
            _ => Err(Error::Parse(format!("unknown observable '{s}'"))),
        }
    }
}

/// `f(θ) = ⟨σ| C(θ)† W C(θ) |σ⟩`.
pub fn expectation(sigma: &Statevector, w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> Result<f64> {
    w.expectation_in(&ansatz.apply(theta, sigma)?)
}

/// `|⟨ρ|σ⟩|²`.
pub fn fidelity(rho: &Statevector, sigma: &Statevector) -> Result<f64> {
    if rho.n() != sigma.n() {
        return Err(Error::Dimension(format!("{} vs {} qubits", rho.n(), sigma.n())));
    }
    Ok(rho.inner(sigma).norm_sqr())
}

pub fn parameter_shift_grad(
    sigma: &Statevector,
    w: &Observable,
    ansatz: &Ansatz,
    theta: &[f64],
    index: usize,
) -> Result<f64> {
    ansatz.check_params(theta)?;
    if index >= theta.len() {
        return Err(Error::ParamIndex { index, len: theta.len() });
    }
    let shift = std::f64::consts::FRAC_PI_2;
    let mut th = theta.to_vec();
    th[index] = theta[index] + shift;
    let plus = expectation(sigma, w, ansatz, &th)?;
    th[index] = theta[index] - shift;
    let minus = expectation(sigma, w, ansatz, &th)?;
    Ok(0.5 * (plus - minus))
}

pub fn grad(sigma: &Statevector, w: &Observable, ansatz: &Ansatz, theta: &[f64]) -> Result<Vec<f64>> {
    ansatz.check_params(theta)?;
    (0..theta.len())
        .map(|i| parameter_shift_grad(sigma, w, ansatz, theta, i))
        .collect()
}

/// Central finite difference with step `h`.
pub fn finite_difference(
    sigma: &Statevector,
    w: &Observable,
    ansatz: &Ansatz,
    theta: &[f64],
    index: usize,
    h: f64,
) -> Result<f64> {
    let mut th = theta.to_vec();
    th[index] = theta[index] + h;
    let plus = expectation(sigma, w, ansatz, &th)?;
    th[index] = theta[index] - h;
    let minus = expectation(sigma, w, ansatz, &th)?;
    Ok((plus - minus) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["global0", "local-avg", "z:3", "proj0:1", "pauli:IXZY"] {
            let o: Observable = s.parse().unwrap();
            assert_eq!(o.to_string(), s);
        }
        assert!("z:0".parse::<Observable>().is_err());
        assert!("mystery".parse::<Observable>().is_err());
        assert_eq!("z:2".parse::<Observable>().unwrap(), Observable::ZString(1));
    }

    #[test]
    fn identity_circuit_on_zero_state() {
        let a = Ansatz::mps(4, 2, 1).unwrap();
        let th = vec![0.0; a.num_params()];
        let s = Statevector::zero(4);
        assert_eq!(expectation(&s, &Observable::GlobalZero, &a, &th).unwrap(), 1.0);
        assert_eq!(expectation(&s, &Observable::LocalAverage, &a, &th).unwrap(), 1.0);
    }

    #[test]
    fn fidelity_values() {
        let z = Statevector::zero(1);
        assert_eq!(fidelity(&z, &z).unwrap(), 1.0);
        assert_eq!(fidelity(&z, &Statevector::basis(1, 1)).unwrap(), 0.0);
        let phi: f64 = 0.3;
        let s = Statevector::from_amplitudes(vec![C64::new(phi.cos(), 0.0), C64::new(phi.sin(), 0.0)]).unwrap();
        assert!((fidelity(&z, &s).unwrap() - phi.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn empty_gradient() {
        let a = Ansatz::hea(2, 0).unwrap();
        assert!(grad(&Statevector::zero(2), &Observable::GlobalZero, &a, &[]).unwrap().is_empty());
    }

    #[test]
    fn out_of_range_qubit_rejected() {
        let s = Statevector::zero(2);
        assert!(Observable::ZString(2).expectation_in(&s).is_err());
    }
}
