//! One-sample Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample [`ks_test`] accepts.
pub const KS_MIN_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `D = sup_x |F_n(x) - F(x)|` against a continuous reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        // small-lambda form converges faster here
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let mut cdf = 0.0;
        let mut term = y;
        let y8 = y.powi(8);
        let mut k = 1;
        while k < 100 {
            cdf += term;
            // y^{(2k+1)^2} = y^{(2k-1)^2} * y^{8k}
            term *= y8.powi(k);
            if term < 1e-17 {
                break;
            }
            k += 1;
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let term = x.powi(j * j);
            sum += sign * term;
            if term < 1e-17 {
                break;
            }
            sign = -sign;
        }
        2.0 * sum
    };
    p.clamp(0.0, 1.0)
}

/// Statistic and asymptotic p-value, with Stephens' finite-sample scaling
/// `lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientData { needed: KS_MIN_SAMPLES, got: samples.len() });
    }
    let statistic = ks_statistic(samples, cdf);
    let root_n = (samples.len() as f64).sqrt();
    let lambda = (root_n + 0.12 + 0.11 / root_n) * statistic;
    Ok(KsResult { statistic, p_value: kolmogorov_survival(lambda) })
}

/// CDF of `N(0, variance)`.
pub fn normal_cdf(variance: f64) -> impl Fn(f64) -> f64 {
    let scale = (2.0 * variance).sqrt();
    move |x| 0.5 * statrs::function::erf::erfc(-x / scale)
}

/// CDF of the unit-mean exponential law.
pub fn unit_exponential_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}
