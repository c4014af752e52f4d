pub mod experiment;
pub mod ks;
pub mod lln;
pub mod report;

pub use experiment::{
    marginal_target_variance, run_clt_experiment, run_periodogram_experiment, spectral_density, Check, CltEntry,
    CltReport, ExperimentPlan, PeriodogramEntry, Verdict, Verdicts,
};
pub use ks::{ks_statistic, ks_test, KsResult};
pub use lln::{lln_rotated_average, LlnPoint, Rotation};
pub use report::{report_to_json, write_report};
