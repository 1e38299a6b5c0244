//! Simultaneous-perturbation stochastic approximation (maximization).

use rand::Rng as _;

use super::config::{GainSchedule, SpsaSettings};
use crate::error::Result;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spsa {
    pub a: f64,
    pub c: f64,
    pub schedule: GainSchedule,
}

impl From<&SpsaSettings> for Spsa {
    fn from(s: &SpsaSettings) -> Self {
        Spsa { a: s.a, c: s.c, schedule: s.schedule }
    }
}

impl Spsa {
    /// Step and perturbation sizes at iteration `j` (0-based).
    pub fn gains(&self, j: usize) -> (f64, f64) {
        match self.schedule {
            GainSchedule::Constant => (self.a, self.c),
            GainSchedule::Decaying { alpha, gamma, stability } => {
                let t = (j + 1) as f64;
                (self.a / (t + stability).powf(alpha), self.c / t.powf(gamma))
            }
        }
    }

    /// One ascent step: `θ += a_j (f(θ + c_jΔ) − f(θ − c_jΔ)) / (2c_j) · Δ`
    /// with Rademacher `Δ`.
    pub fn step<F>(&self, j: usize, theta: &mut [f64], rng: &mut Rng, f: &F) -> Result<()>
    where
        F: Fn(&[f64]) -> Result<f64>,
    {
        let (a, c) = self.gains(j);
        let delta: Vec<f64> = (0..theta.len()).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + c * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - c * d).collect();
        let g = (f(&plus)? - f(&minus)?) / (2.0 * c);
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t += a * g * d;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn climbs_a_concave_quadratic() {
        let s = Spsa { a: 0.1, c: 0.1, schedule: GainSchedule::Constant };
        let f = |x: &[f64]| Ok(-x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>());
        let mut th = vec![0.0; 4];
        let mut rng = Rng::seed_from_u64(1);
        for j in 0..300 {
            s.step(j, &mut th, &mut rng, &f).unwrap();
        }
        assert!(f(&th).unwrap() > -1e-6);
    }

    #[test]
    fn decaying_gains() {
        let s = Spsa { a: 1.0, c: 1.0, schedule: GainSchedule::Decaying { alpha: 1.0, gamma: 0.5, stability: 1.0 } };
        assert_eq!(s.gains(0), (0.5, 1.0));
        assert_eq!(s.gains(3), (0.2, 0.5));
    }
}
