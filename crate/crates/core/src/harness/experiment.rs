//! Monte Carlo checks of the limit laws for `S_n(t)` and `I_n(t)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::harness::ks::{ks_test, normal_cdf, unit_exponential_cdf, KsResult};
use crate::lattice::LatticeShape;
use crate::models::{analytic_spectral_density, simulate, FieldModel};
use crate::par::try_map_indexed;
use crate::projection::spectral_density_symbolic;
use crate::rng::StreamKey;
use crate::spectral::{fourier_sum_values, FrequencyPoint};
use crate::stats::{covariance, mean, second_moment, variance, Estimate};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Relative band for each marginal variance.
pub const VARIANCE_BAND: f64 = 0.10;
/// `|corr(Re, Im)|` must stay below this many `1/sqrt(R)`.
pub const CORRELATION_FACTOR: f64 = 4.0;
/// Level of every KS test.
pub const KS_ALPHA: f64 = 0.01;
/// Mean periodogram must lie within this many standard errors of `f(t)`.
pub const MEAN_SE_BAND: f64 = 3.0;
/// Fewest replicates a distributional check accepts.
pub const MIN_REPLICATES: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Marginal variances, Re/Im correlation and normality of `S_n(t)`.
    Clt,
    /// Mean and exponential limit law of `I_n(t) / f(t)`.
    Periodogram,
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub model: FieldModel,
    pub frequencies: Vec<FrequencyPoint>,
    pub shapes: Vec<LatticeShape>,
    pub replicates: u64,
    pub master_seed: u64,
    pub checks: BTreeSet<Check>,
    /// Doubles every target variance so a correct run must fail.
    pub negative_control: bool,
    pub parallel: bool,
}

impl ExperimentPlan {
    pub fn new(model: FieldModel, frequencies: Vec<FrequencyPoint>, shapes: Vec<LatticeShape>) -> Self {
        Self {
            model,
            frequencies,
            shapes,
            replicates: 2000,
            master_seed: 0,
            checks: [Check::Clt, Check::Periodogram].into_iter().collect(),
            negative_control: false,
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !self.checks.is_empty() && self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidPlan(format!(
                "distributional checks need at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        if self.replicates >= 1 << 32 {
            return Err(Error::InvalidPlan("replicate count must fit in 32 bits".into()));
        }
        for t in &self.frequencies {
            t.ensure_generic()?;
        }
        let dims: BTreeSet<usize> = self
            .frequencies
            .iter()
            .map(FrequencyPoint::dim)
            .chain(self.shapes.iter().map(LatticeShape::dim))
            .chain(self.model.dim())
            .collect();
        if dims.len() > 1 {
            return Err(Error::InvalidPlan(format!("model, frequencies and shapes mix dimensions {dims:?}")));
        }
        Ok(())
    }

    /// Innovation key of replicate `r` for the `shape_index`-th shape.
    pub fn replicate_key(&self, shape_index: usize, r: u64) -> StreamKey {
        StreamKey::innovations(self.master_seed, ((shape_index as u64) << 32) | r)
    }
}

/// Spectral density from the closed form, or from the exact projection
/// representation for models without one.
pub fn spectral_density(model: &FieldModel, t: &FrequencyPoint) -> Result<f64> {
    match model {
        FieldModel::Volterra { .. } => spectral_density_symbolic(model, t),
        _ => analytic_spectral_density(model, t),
    }
}

/// Variance of each of `Re S_n(t) / sqrt(N)` and `Im S_n(t) / sqrt(N)` in the
/// limit: `2^{d-1} pi^d f(t)`.
pub fn marginal_target_variance(dim: usize, f: f64) -> f64 {
    2f64.powi(dim as i32 - 1) * PI.powi(dim as i32) * f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Statistic undefined (degenerate field); flagged rather than failed.
    Skipped,
    /// Check not requested by the plan.
    NotRun,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Self::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub variance_re: Verdict,
    pub variance_im: Verdict,
    pub correlation: Verdict,
    pub ks_re: Verdict,
    pub ks_im: Verdict,
    pub periodogram_mean: Verdict,
    pub ks_periodogram: Verdict,
}

impl Verdicts {
    fn all(&self) -> [Verdict; 7] {
        [
            self.variance_re,
            self.variance_im,
            self.correlation,
            self.ks_re,
            self.ks_im,
            self.periodogram_mean,
            self.ks_periodogram,
        ]
    }

    pub fn pass(&self) -> bool {
        !self.all().iter().any(|v| v.is_failure())
    }
}

/// Statistics for one `(frequency, shape)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltEntry {
    pub frequency: Vec<f64>,
    pub shape: Vec<usize>,
    pub replicates: u64,
    pub spectral_density: f64,
    /// Target variance of each marginal, after any negative-control scaling.
    pub target_variance: f64,
    /// Sample mean of `(Re, Im) / sqrt(N)`.
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Mean of `(Re^2, Im^2) / N`.
    pub second_moment: [f64; 2],
    pub correlation: f64,
    pub ks_re: Option<KsResult>,
    pub ks_im: Option<KsResult>,
    pub mean_periodogram: f64,
    pub periodogram_std_error: f64,
    /// KS of `I_n(t) / f(t)` against the unit-mean exponential law.
    pub ks_periodogram: Option<KsResult>,
    pub verdicts: Verdicts,
    pub pass: bool,
}

impl CltEntry {
    /// Identities that must hold between report fields up to rounding:
    /// the two marginal targets add to `2^d pi^d f(t)` (without negative
    /// control) and the mean periodogram is the second moments over `(2 pi)^d`.
    pub fn normalization_consistent(&self, negative_control: bool) -> bool {
        let d = self.shape.len() as i32;
        let scale = if negative_control { 2.0 } else { 1.0 };
        let total = 2.0 * self.target_variance / scale;
        let expected_total = 2f64.powi(d) * PI.powi(d) * self.spectral_density;
        let pg = (self.second_moment[0] + self.second_moment[1]) / (2.0 * PI).powi(d);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        close(total, expected_total) && close(self.mean_periodogram, pg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub master_seed: u64,
    pub replicates: u64,
    pub checks: Vec<Check>,
    pub negative_control: bool,
    pub results: Vec<CltEntry>,
    pub pass: bool,
    /// Wall-clock creation time; the only field allowed to differ between runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

/// `S_n(t)` for every replicate of one shape: `sums[r][frequency]`.
fn collect_sums(plan: &ExperimentPlan, shape_index: usize) -> Result<Vec<Vec<Complex64>>> {
    let shape = &plan.shapes[shape_index];
    try_map_indexed(plan.replicates, plan.parallel, |r| {
        let sample = simulate(&plan.model, shape, plan.replicate_key(shape_index, r))?;
        Ok(plan.frequencies.iter().map(|t| fourier_sum_values(&sample.values, shape, t)).collect())
    })
}

fn summarize(
    plan: &ExperimentPlan,
    shape: &LatticeShape,
    t: &FrequencyPoint,
    sums: impl Iterator<Item = Complex64>,
) -> Result<CltEntry> {
    let d = shape.dim();
    let n = shape.len() as f64;
    let root_n = n.sqrt();
    let (re, im): (Vec<f64>, Vec<f64>) = sums.map(|s| (s.re / root_n, s.im / root_n)).unzip();
    let r = re.len() as f64;
    let norm = (2.0 * PI).powi(d as i32);
    let periodograms: Vec<f64> = re.iter().zip(&im).map(|(a, b)| (a * a + b * b) / norm).collect();

    let f = spectral_density(&plan.model, t)?;
    let control = if plan.negative_control { 2.0 } else { 1.0 };
    let target = control * marginal_target_variance(d, f);
    let cov = [[variance(&re), covariance(&re, &im)], [covariance(&im, &re), variance(&im)]];
    let degenerate = f <= 0.0 || cov[0][0] <= 0.0 || cov[1][1] <= 0.0;
    let correlation = if degenerate { 0.0 } else { cov[0][1] / (cov[0][0] * cov[1][1]).sqrt() };
    let pg = Estimate::from_samples(&periodograms);

    let clt = plan.checks.contains(&Check::Clt);
    let per = plan.checks.contains(&Check::Periodogram);
    let run_ks = |xs: &[f64], cdf: &dyn Fn(f64) -> f64| -> Result<Option<KsResult>> {
        if degenerate {
            Ok(None)
        } else {
            ks_test(xs, cdf).map(Some)
        }
    };
    let (ks_re, ks_im) = if clt {
        let cdf = normal_cdf(target);
        (run_ks(&re, &cdf)?, run_ks(&im, &cdf)?)
    } else {
        (None, None)
    };
    let ks_periodogram = if per {
        let ratios: Vec<f64> = periodograms.iter().map(|p| p / f).collect();
        run_ks(&ratios, &unit_exponential_cdf)?
    } else {
        None
    };

    let judge = |enabled: bool, ok: bool| {
        if !enabled {
            Verdict::NotRun
        } else if degenerate {
            Verdict::Skipped
        } else {
            Verdict::from_bool(ok)
        }
    };
    let in_band = |v: f64| (v / target - 1.0).abs() <= VARIANCE_BAND;
    let ks_ok = |k: &Option<KsResult>| k.is_some_and(|k| k.p_value > KS_ALPHA);
    let verdicts = Verdicts {
        variance_re: judge(clt, in_band(cov[0][0])),
        variance_im: judge(clt, in_band(cov[1][1])),
        correlation: judge(clt, correlation.abs() < CORRELATION_FACTOR / r.sqrt()),
        ks_re: judge(clt, ks_ok(&ks_re)),
        ks_im: judge(clt, ks_ok(&ks_im)),
        periodogram_mean: judge(per, pg.agrees_with(f, MEAN_SE_BAND)),
        ks_periodogram: judge(per, ks_ok(&ks_periodogram)),
    };
    let pass = verdicts.pass();
    Ok(CltEntry {
        frequency: t.coords().to_vec(),
        shape: shape.extents().to_vec(),
        replicates: plan.replicates,
        spectral_density: f,
        target_variance: target,
        mean: [mean(&re), mean(&im)],
        covariance: cov,
        second_moment: [second_moment(&re), second_moment(&im)],
        correlation,
        ks_re,
        ks_im,
        mean_periodogram: pg.mean,
        periodogram_std_error: pg.std_error,
        ks_periodogram,
        verdicts,
        pass,
    })
}

/// Simulate every shape of the plan and summarize each `(frequency, shape)`.
pub fn run_clt_experiment(plan: &ExperimentPlan) -> Result<CltReport> {
    plan.validate()?;
    let dim = plan
        .model
        .dim()
        .or_else(|| plan.shapes.first().map(LatticeShape::dim))
        .or_else(|| plan.frequencies.first().map(FrequencyPoint::dim))
        .unwrap_or(2);
    let mut results = Vec::with_capacity(plan.shapes.len() * plan.frequencies.len());
    for (si, shape) in plan.shapes.iter().enumerate() {
        let sums = collect_sums(plan, si)?;
        for (fi, t) in plan.frequencies.iter().enumerate() {
            results.push(summarize(plan, shape, t, sums.iter().map(|row| row[fi]))?);
        }
    }
    let pass = results.iter().all(|e| e.pass);
    Ok(CltReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model: ModelConfig::from_model(&plan.model, dim),
        master_seed: plan.master_seed,
        replicates: plan.replicates,
        checks: plan.checks.iter().copied().collect(),
        negative_control: plan.negative_control,
        results,
        pass,
        generated_at_unix: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodogramEntry {
    pub frequency: Vec<f64>,
    pub shape: Vec<usize>,
    pub spectral_density: f64,
    pub mean: f64,
    pub std_error: f64,
    pub ks: Option<KsResult>,
    pub mean_verdict: Verdict,
    pub ks_verdict: Verdict,
}

/// Mean periodogram and the law of `I_n(t) / f(t)` for each `(frequency, shape)`.
pub fn run_periodogram_experiment(plan: &ExperimentPlan) -> Result<Vec<PeriodogramEntry>> {
    let mut only = plan.clone();
    only.checks = [Check::Periodogram].into_iter().collect();
    let report = run_clt_experiment(&only)?;
    Ok(report
        .results
        .into_iter()
        .map(|e| PeriodogramEntry {
            frequency: e.frequency,
            shape: e.shape,
            spectral_density: e.spectral_density,
            mean: e.mean_periodogram,
            std_error: e.periodogram_std_error,
            ks: e.ks_periodogram,
            mean_verdict: e.verdicts.periodogram_mean,
            ks_verdict: e.verdicts.ks_periodogram,
        })
        .collect())
}
