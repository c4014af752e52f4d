//! Subcommand implementations. Each one maps a config plus overrides to
//! output bytes and an [`Outcome`].

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use latspec::harness::report::{csv_record, failed_checks, CSV_COLUMNS};
use latspec::harness::{lln_rotated_average, report_to_json, run_clt_experiment, spectral_density, CltReport};
use latspec::projection::martingale_approx_error;
use latspec::spectral::{
    covariance_range, default_quadrature_resolution, fejer_smoothed_variance, spectral_density_partial_sum,
};
use latspec::stats::{decreases_within, Estimate};
use latspec::{simulate, Error, FieldModel, FrequencyPoint, Result, StreamKey};

use crate::config::RunConfig;

/// Verdict of a run; errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Command-line flags that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replicates: Option<u64>,
    pub no_timestamp: bool,
    pub negative_control: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.experiment.master_seed = seed;
        }
        if let Some(r) = self.replicates {
            config.experiment.replicates = r;
            if let Some(lln) = &mut config.lln {
                lln.replicates = r;
            }
        }
        if self.no_timestamp {
            config.output.timestamp = false;
        }
        if self.out.is_some() {
            config.output.path = self.out.clone();
        }
    }
}

/// 0 pass, 1 verdict failure, 2 usage or config error, 3 I/O error.
pub fn exit_code(result: &Result<Outcome>) -> u8 {
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(Error::Io { .. }) => 3,
        Err(_) => 2,
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| Error::Io { path: p.to_path_buf(), source }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn coords(t: &FrequencyPoint) -> String {
    t.coords().iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::Config(format!("missing [{name}] section")))
}

/// One realization as CSV: site indices then value.
pub fn simulate_cmd(config: &RunConfig) -> Result<Outcome> {
    let sim = section(&config.simulate, "simulate")?;
    let model = config.field_model()?;
    let key = StreamKey::innovations(config.experiment.master_seed, sim.replicate);
    let sample = simulate(&model, &sim.shape, key)?;
    let d = sim.shape.dim();
    let header: Vec<String> = (1..=d).map(|i| format!("u{i}")).chain(["value".to_string()]).collect();
    let rows = sample.rows().map(|(site, x)| site.iter().map(i64::to_string).chain([x.to_string()]).collect());
    emit(config.output.path.as_deref(), &csv_bytes(&header, rows))?;
    Ok(Outcome::Pass)
}

/// Density evaluator for quadrature: closed forms, or the finite covariance
/// series where the only exact form is symbolic.
fn density_fn(model: &FieldModel) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| {
        let t = FrequencyPoint::new(x.to_vec()).expect("quadrature nodes lie in [-pi, pi)");
        match (model, covariance_range(model)) {
            (FieldModel::Volterra { .. }, Some(range)) => spectral_density_partial_sum(model, &t, range),
            _ => spectral_density(model, &t).expect("closed-form density"),
        }
    }
}

/// `f` three ways on a frequency grid.
pub fn spectrum_cmd(config: &RunConfig) -> Result<Outcome> {
    let spec = section(&config.spectrum, "spectrum")?;
    let model = config.field_model()?;
    let d = config.dim()?;
    if spec.grid.len() != d || spec.shape.dim() != d || spec.grid.contains(&0) {
        return Err(Error::Config(format!("spectrum grid and shape need {d} positive extents")));
    }
    model.check_dim(d)?;
    let radius = match (spec.radius, covariance_range(&model)) {
        (Some(r), _) => r,
        (None, Some(r)) => r,
        (None, None) => return Err(Error::Config("spectrum.radius is required for gaussian-columns".into())),
    };
    let norm = (2.0 * PI).powi(d as i32);
    let resolution = default_quadrature_resolution(&spec.shape);
    let f = density_fn(&model);
    let header: Vec<String> = (1..=d)
        .map(|i| format!("t{i}"))
        .chain(["f_analytic", "f_partial_sum", "fejer_smoothed"].map(String::from))
        .collect();
    let total: usize = spec.grid.iter().product();
    let mut rows = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut x = vec![0.0; d];
        for a in (0..d).rev() {
            let m = spec.grid[a];
            x[a] = -PI + 2.0 * PI * (rest % m) as f64 / m as f64;
            rest /= m;
        }
        let t = FrequencyPoint::new(x.clone())?;
        let analytic = spectral_density(&model, &t)?;
        let partial = spectral_density_partial_sum(&model, &t, radius);
        let smoothed = fejer_smoothed_variance(&f, &spec.shape, &t, &resolution)? / norm;
        rows.push(x.iter().chain([analytic, partial, smoothed].iter()).map(f64::to_string).collect());
    }
    emit(config.output.path.as_deref(), &csv_bytes(&header, rows))?;
    Ok(Outcome::Pass)
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Runs the configured experiment and returns its report.
pub fn clt_report(config: &RunConfig, negative_control: bool) -> Result<CltReport> {
    let mut plan = config.plan()?;
    plan.negative_control = negative_control;
    let mut report = run_clt_experiment(&plan)?;
    if config.output.timestamp {
        report.generated_at_unix = Some(timestamp());
    }
    Ok(report)
}

pub fn clt_cmd(config: &RunConfig, negative_control: bool) -> Result<Outcome> {
    let report = clt_report(config, negative_control)?;
    emit(config.output.path.as_deref(), report_to_json(&report).as_bytes())?;
    if let Some(path) = &config.output.csv {
        let header: Vec<String> = CSV_COLUMNS.iter().map(|c| c.to_string()).collect();
        emit(Some(path), &csv_bytes(&header, report.results.iter().map(csv_record)))?;
    }
    for e in &report.results {
        let failed = failed_checks(e);
        let verdict = if e.pass { "pass".to_string() } else { format!("FAIL ({})", failed.join(", ")) };
        eprintln!("t = {:?}, n = {:?}: {verdict}", e.frequency, e.shape);
    }
    Ok(Outcome::from_pass(report.pass))
}

/// Normalized martingale-approximation error along the shape ladder.
pub fn martingale_error_cmd(config: &RunConfig) -> Result<Outcome> {
    let model = config.field_model()?;
    let e = &config.experiment;
    if e.frequencies.is_empty() || e.shapes.is_empty() {
        return Err(Error::Config("martingale-error needs experiment.frequencies and experiment.shapes".into()));
    }
    let truncation = e.truncation.unwrap_or_else(|| model.halo());
    let header: Vec<String> = ["frequency", "shape", "estimate", "standard_error"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut pass = true;
    for t in &e.frequencies {
        t.ensure_generic()?;
        let mut ladder: Vec<Estimate> = Vec::new();
        for (i, shape) in e.shapes.iter().enumerate() {
            let key = StreamKey::innovations(e.master_seed, (i as u64) << 32);
            let est = martingale_approx_error(&model, shape, t, truncation, e.replicates, key)?;
            rows.push(vec![coords(t), shape.to_string(), est.mean.to_string(), est.std_error.to_string()]);
            ladder.push(est);
        }
        let ok = decreases_within(&ladder, 2.0);
        if !ok {
            eprintln!("t = {:?}: error does not decrease along the shape ladder", t.coords());
        }
        pass &= ok;
    }
    emit(config.output.path.as_deref(), &csv_bytes(&header, rows))?;
    Ok(Outcome::from_pass(pass))
}

/// Rotated row averages along the `n1` ladder.
pub fn lln_cmd(config: &RunConfig) -> Result<Outcome> {
    let lln = section(&config.lln, "lln")?;
    let model = config.field_model()?;
    let key = StreamKey::innovations(config.experiment.master_seed, 0);
    let points =
        lln_rotated_average(&model, &lln.frequency, &lln.n1, lln.n2, lln.replicates, key, lln.rotation.into(), true)?;
    let header: Vec<String> = ["n1", "n2", "estimate", "standard_error"].map(String::from).to_vec();
    let rows = points.iter().map(|p| {
        vec![p.n1.to_string(), p.n2.to_string(), p.estimate.mean.to_string(), p.estimate.std_error.to_string()]
    });
    emit(config.output.path.as_deref(), &csv_bytes(&header, rows))?;
    let estimates: Vec<Estimate> = points.iter().map(|p| p.estimate).collect();
    let pass = decreases_within(&estimates, 2.0);
    if !pass {
        eprintln!("rotated averages do not decrease along n1");
    }
    Ok(Outcome::from_pass(pass))
}
