//! Sample statistics with standard errors.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, se: 0.0, samples: 0 }
    }

    /// Sample mean with standard error `s / sqrt(m)`.
    pub fn mean_of(xs: &[f64]) -> Self {
        let m = xs.len();
        if m == 0 {
            return Estimate { mean: f64::NAN, se: f64::NAN, samples: 0 };
        }
        let mean = xs.iter().sum::<f64>() / m as f64;
        let se = if m > 1 {
            let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (m - 1) as f64 / m as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, se, samples: m }
    }

    /// Unbiased sample variance; SE from the fourth central moment.
    pub fn variance_of(xs: &[f64]) -> Self {
        let m = xs.len();
        if m < 2 {
            return Estimate { mean: f64::NAN, se: f64::NAN, samples: m };
        }
        let mf = m as f64;
        let mean = xs.iter().sum::<f64>() / mf;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / mf;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / mf;
        let var = m2 * mf / (mf - 1.0);
        let se2 = if m > 3 {
            (m4 - var * var * (mf - 3.0) / (mf - 1.0)) / mf
        } else {
            m4 / mf
        };
        Estimate { mean: var, se: se2.max(0.0).sqrt(), samples: m }
    }

    /// `|mean - target| <= k * se`, with a floating-point slack for `se = 0`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + 1e-12 * (1.0 + target.abs())
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.se
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Linear-interpolated quantile, `q` in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}
