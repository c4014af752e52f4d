//! Small descriptive-statistics helpers shared by the Monte Carlo code.

use serde::{Deserialize, Serialize};

use crate::numeric::CompensatedSum;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = mean(samples);
        let std_error = if n > 1 { (variance(samples) / n as f64).sqrt() } else { f64::NAN };
        Self { mean, std_error }
    }

    /// Is `value` within `k` standard errors of the mean?
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }

    /// Distance to `value` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.mean - value) / self.std_error
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    covariance(xs, xs)
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let acc: CompensatedSum = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    acc.value() / (n - 1) as f64
}

/// Mean of squares (second raw moment).
pub fn second_moment(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).collect::<CompensatedSum>().value() / xs.len() as f64
}

/// Does the sequence decrease, allowing each step to rise by at most
/// `slack` combined standard errors?
pub fn decreases_within(estimates: &[Estimate], slack: f64) -> bool {
    estimates.windows(2).all(|w| {
        let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        w[1].mean <= w[0].mean + slack * se
    })
}
