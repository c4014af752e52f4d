//! Serializable model descriptions.
//!
//! TOML and JSON share one schema:
//!
//! ```toml
//! kind = "linear"
//! innovation = { distribution = "rademacher" }
//! coefficients = [
//!     { lag = [0, 0], value = 1.0 },
//!     { lag = [1, 0], value = 0.5 },
//! ]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;
use crate::models::{CoefficientKernel, FieldModel, VolterraEntry, VolterraKernel};
use crate::rng::InnovationSpec;

pub const DEFAULT_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Iid,
    Linear,
    Volterra,
    GaussianColumns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub lag: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub innovation: Option<InnovationSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

impl ModelConfig {
    /// Lattice dimension: explicit `dim`, else inferred from kernel lags, else 2.
    pub fn resolved_dim(&self) -> Result<usize> {
        let inferred = self
            .coefficients
            .first()
            .map(|c| c.lag.len())
            .or_else(|| self.pairs.first().map(|p| p.u.len()));
        let dim = match (self.dim, inferred) {
            (Some(d), Some(i)) if d != i => {
                return Err(Error::Config(format!("dim = {d} but kernel lags have length {i}")));
            }
            (Some(d), _) => d,
            (None, Some(i)) => i,
            (None, None) => DEFAULT_DIM,
        };
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Config(format!("dim must be in 1..={MAX_DIM}, got {dim}")));
        }
        Ok(dim)
    }

    fn reject(&self, field: &str, present: bool) -> Result<()> {
        if present {
            let kind = serde_json::to_value(self.kind).expect("kind serializes");
            return Err(Error::Config(format!("field `{field}` does not apply to kind {kind}")));
        }
        Ok(())
    }

    pub fn to_model(&self) -> Result<FieldModel> {
        let dim = self.resolved_dim()?;
        let innovation = self.innovation.unwrap_or_default();
        innovation.validate()?;
        let model = match self.kind {
            ModelKind::Iid => {
                self.reject("coefficients", !self.coefficients.is_empty())?;
                self.reject("pairs", !self.pairs.is_empty())?;
                self.reject("phi", self.phi.is_some())?;
                FieldModel::Iid(innovation)
            }
            ModelKind::Linear => {
                self.reject("pairs", !self.pairs.is_empty())?;
                self.reject("phi", self.phi.is_some())?;
                let terms = self.coefficients.iter().map(|c| (c.lag.clone(), c.value)).collect();
                FieldModel::linear(CoefficientKernel::new(dim, terms)?, innovation)
            }
            ModelKind::Volterra => {
                self.reject("coefficients", !self.coefficients.is_empty())?;
                self.reject("phi", self.phi.is_some())?;
                let entries = self
                    .pairs
                    .iter()
                    .map(|p| VolterraEntry { u: p.u.clone(), v: p.v.clone(), coeff: p.value })
                    .collect();
                FieldModel::volterra(VolterraKernel::new(dim, entries)?, innovation)
            }
            ModelKind::GaussianColumns => {
                self.reject("coefficients", !self.coefficients.is_empty())?;
                self.reject("pairs", !self.pairs.is_empty())?;
                self.reject("innovation", self.innovation.is_some())?;
                let phi = self.phi.ok_or_else(|| Error::Config("gaussian-columns needs `phi`".into()))?;
                FieldModel::gaussian_columns(phi)?
            }
        };
        Ok(model)
    }

    /// Inverse of [`ModelConfig::to_model`]; `dim` is used for models that carry none.
    pub fn from_model(model: &FieldModel, dim: usize) -> Self {
        let mut config = Self {
            kind: ModelKind::Iid,
            dim: Some(model.dim().unwrap_or(dim)),
            innovation: None,
            coefficients: vec![],
            pairs: vec![],
            phi: None,
        };
        match model {
            FieldModel::Iid(innovation) => config.innovation = Some(*innovation),
            FieldModel::Linear { kernel, innovation } => {
                config.kind = ModelKind::Linear;
                config.innovation = Some(*innovation);
                config.coefficients = kernel
                    .terms()
                    .iter()
                    .map(|(lag, value)| CoefficientEntry { lag: lag.clone(), value: *value })
                    .collect();
            }
            FieldModel::Volterra { kernel, innovation } => {
                config.kind = ModelKind::Volterra;
                config.innovation = Some(*innovation);
                config.pairs = kernel
                    .entries()
                    .iter()
                    .map(|e| PairEntry { u: e.u.clone(), v: e.v.clone(), value: e.coeff })
                    .collect();
            }
            FieldModel::GaussianColumns { phi } => {
                config.kind = ModelKind::GaussianColumns;
                config.phi = Some(*phi);
            }
        }
        config
    }
}
