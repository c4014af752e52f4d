//! Spectral analysis of stationary random fields on `Z^d`.
//!
//! Fields are generated from i.i.d. innovations through finitely supported
//! linear or second-order Volterra kernels, or as AR(1) Gaussian columns.
//! The crate computes Fourier sums, periodograms and spectral densities,
//! builds the orthogonal projections behind the martingale approximation,
//! and runs Monte Carlo checks of the resulting limit laws.

pub mod config;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod models;
pub mod numeric;
mod par;
pub mod projection;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use config::ModelConfig;
pub use error::{Error, Result};
pub use lattice::LatticeShape;
pub use models::{
    analytic_covariance, analytic_spectral_density, simulate, CoefficientKernel, FieldModel, LatticeSample,
    VolterraEntry, VolterraKernel,
};
pub use rng::{InnovationSpec, StreamKey};
pub use spectral::{fourier_sum, periodogram, FrequencyPoint};
