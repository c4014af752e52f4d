//! JSON and CSV serialization of [`CltReport`].

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::experiment::{CltEntry, CltReport, Verdict};

/// Pretty JSON with a trailing newline. Byte-stable for equal reports.
pub fn report_to_json(report: &CltReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_report(report: &CltReport, path: &Path) -> Result<()> {
    fs::write(path, report_to_json(report)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub const CSV_COLUMNS: [&str; 20] = [
    "frequency",
    "shape",
    "replicates",
    "spectral_density",
    "target_variance",
    "mean_re",
    "mean_im",
    "var_re",
    "var_im",
    "cov_re_im",
    "correlation",
    "ks_re_statistic",
    "ks_re_p",
    "ks_im_statistic",
    "ks_im_p",
    "mean_periodogram",
    "periodogram_std_error",
    "ks_periodogram_statistic",
    "ks_periodogram_p",
    "pass",
];

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One flat record per result, in [`CSV_COLUMNS`] order.
pub fn csv_record(entry: &CltEntry) -> Vec<String> {
    vec![
        join(&entry.frequency),
        join(&entry.shape),
        entry.replicates.to_string(),
        entry.spectral_density.to_string(),
        entry.target_variance.to_string(),
        entry.mean[0].to_string(),
        entry.mean[1].to_string(),
        entry.covariance[0][0].to_string(),
        entry.covariance[1][1].to_string(),
        entry.covariance[0][1].to_string(),
        entry.correlation.to_string(),
        opt(entry.ks_re.map(|k| k.statistic)),
        opt(entry.ks_re.map(|k| k.p_value)),
        opt(entry.ks_im.map(|k| k.statistic)),
        opt(entry.ks_im.map(|k| k.p_value)),
        entry.mean_periodogram.to_string(),
        entry.periodogram_std_error.to_string(),
        opt(entry.ks_periodogram.map(|k| k.statistic)),
        opt(entry.ks_periodogram.map(|k| k.p_value)),
        entry.pass.to_string(),
    ]
}

/// Names of the failed checks of an entry.
pub fn failed_checks(entry: &CltEntry) -> Vec<&'static str> {
    let v = &entry.verdicts;
    [
        ("variance_re", v.variance_re),
        ("variance_im", v.variance_im),
        ("correlation", v.correlation),
        ("ks_re", v.ks_re),
        ("ks_im", v.ks_im),
        ("periodogram_mean", v.periodogram_mean),
        ("ks_periodogram", v.ks_periodogram),
    ]
    .into_iter()
    .filter(|(_, verdict)| *verdict == Verdict::Fail)
    .map(|(name, _)| name)
    .collect()
}
