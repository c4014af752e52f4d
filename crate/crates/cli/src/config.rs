//! Run configuration: one file per invocation, TOML or JSON.

use std::path::{Path, PathBuf};

use latspec::harness::{Check, ExperimentPlan, Rotation};
use latspec::{Error, FieldModel, FrequencyPoint, LatticeShape, ModelConfig, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default)]
    pub lln: Option<LlnSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub frequencies: Vec<FrequencyPoint>,
    #[serde(default)]
    pub shapes: Vec<LatticeShape>,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    /// Truncation of the projection series; defaults to the kernel radius.
    #[serde(default)]
    pub truncation: Option<usize>,
}

fn default_replicates() -> u64 {
    2000
}

fn default_checks() -> Vec<Check> {
    vec![Check::Clt, Check::Periodogram]
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            frequencies: vec![],
            shapes: vec![],
            replicates: default_replicates(),
            master_seed: 0,
            checks: default_checks(),
            truncation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Main output; `--out` takes precedence, stdout if neither is set.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Flat CSV copy of the `clt` report.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub timestamp: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { path: None, csv: None, timestamp: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub shape: LatticeShape,
    #[serde(default)]
    pub replicate: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Points per axis; axis `i` samples `-pi + 2 pi k / grid[i]`.
    pub grid: Vec<usize>,
    /// Lattice shape of the Fejer-smoothed column.
    pub shape: LatticeShape,
    /// Covariance lags kept in the partial sum; defaults to the covariance range.
    #[serde(default)]
    pub radius: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnSection {
    pub frequency: FrequencyPoint,
    pub n1: Vec<usize>,
    pub n2: usize,
    #[serde(default = "default_rotation")]
    pub rotation: RotationName,
    #[serde(default = "default_lln_replicates")]
    pub replicates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationName {
    Fourier,
    Plain,
}

impl From<RotationName> for Rotation {
    fn from(r: RotationName) -> Self {
        match r {
            RotationName::Fourier => Rotation::Fourier,
            RotationName::Plain => Rotation::Plain,
        }
    }
}

fn default_rotation() -> RotationName {
    RotationName::Fourier
}

fn default_lln_replicates() -> u64 {
    1000
}

impl RunConfig {
    /// Parse by extension: `.json` is JSON, anything else TOML.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn field_model(&self) -> Result<FieldModel> {
        self.model.to_model()
    }

    pub fn dim(&self) -> Result<usize> {
        self.model.resolved_dim()
    }

    pub fn plan(&self) -> Result<ExperimentPlan> {
        let e = &self.experiment;
        let mut plan = ExperimentPlan::new(self.field_model()?, e.frequencies.clone(), e.shapes.clone());
        plan.replicates = e.replicates;
        plan.master_seed = e.master_seed;
        plan.checks = e.checks.iter().copied().collect();
        plan.validate()?;
        Ok(plan)
    }
}
