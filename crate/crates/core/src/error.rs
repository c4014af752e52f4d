use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice shape: {0}")]
    InvalidShape(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("invalid spectral density: {0}")]
    InvalidDensity(String),

    #[error("innovation at site {site:?} lies outside the sampled window")]
    MissingInnovation { site: Vec<i64> },

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("frequency {coords:?} is not generic: {reason}")]
    NonGenericFrequency { coords: Vec<f64>, reason: String },

    #[error("invalid frequency: {0}")]
    InvalidFrequency(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
