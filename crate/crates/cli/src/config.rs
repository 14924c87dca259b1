//! Sweep configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dissim_core::analysis::EngineKind;
use dissim_core::dense::DEFAULT_DENSE_CAP;
use dissim_core::ModelSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Grid {
    pub fn single(v: f64) -> Self {
        Self {
            min: v,
            max: v,
            count: 1,
            spacing: Spacing::Linear,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            c => (0..c)
                .map(|k| match k {
                    k if k == c - 1 => self.max,
                    k => self.min + (self.max - self.min) * k as f64 / (c - 1) as f64,
                })
                .collect(),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(CliError::Config(format!("{name}: grid is empty")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(CliError::Config(format!("{name}: need finite min <= max")));
        }
        if self.count == 1 && self.max != self.min {
            return Err(CliError::Config(format!("{name}: a single point needs min == max")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub n: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_j_sign")]
    pub j_sign: f64,
}

fn default_j_sign() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetBlock {
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// File stem for the sweep outputs and checkpoint.
    #[serde(default = "default_stem")]
    pub name: String,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn default_stem() -> String {
    "sweep".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Worker threads; 0 lets the pool decide. `DISSIM_THREADS` overrides it.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    /// Completed cells between checkpoint writes.
    #[serde(default = "default_checkpoint_interval")]
    pub checkpoint_interval: usize,
}

fn default_checkpoint_interval() -> usize {
    10
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            workers: 0,
            seed: 0,
            checkpoint_interval: default_checkpoint_interval(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub engine: EngineKind,
    pub model: ModelBlock,
    pub delta_grid: Grid,
    pub gamma_grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetBlock>,
    pub outputs: OutputBlock,
    #[serde(default)]
    pub run: RunBlock,
    /// Compute the correlation diagnostics for every cell.
    #[serde(default = "default_true")]
    pub correlations: bool,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
}

fn default_true() -> bool {
    true
}

fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn model_at(&self, delta: f64) -> Result<ModelSpec> {
        Ok(ModelSpec::new(self.model.n, self.model.alpha, delta)?.with_j_sign(self.model.j_sign)?)
    }

    pub fn tau(&self) -> Option<f64> {
        self.floquet.map(|f| f.tau)
    }

    /// Every check that can fail before any cell is solved.
    pub fn validate(&self) -> Result<()> {
        self.delta_grid.validate("delta_grid")?;
        self.gamma_grid.validate("gamma_grid")?;
        let probe = self.model_at(self.delta_grid.min)?;
        self.engine.check_model(&probe, self.dense_cap)?;
        if self.gamma_grid.min < 0.0 {
            return Err(CliError::Config("gamma_grid: rates must be non-negative".into()));
        }
        match (self.engine.is_floquet(), self.floquet) {
            (true, None) => return Err(CliError::Config(format!("{} needs a floquet block", self.engine))),
            (true, Some(f)) => {
                if !(f.tau.is_finite() && f.tau > 0.0) {
                    return Err(CliError::Config("floquet.tau must be positive".into()));
                }
                if self.gamma_grid.max * f.tau > 1.0 {
                    return Err(CliError::Config(format!(
                        "gamma * tau reaches {} > 1; the reset probability would exceed one",
                        self.gamma_grid.max * f.tau
                    )));
                }
            }
            (false, Some(_)) => {
                return Err(CliError::Config(format!("{} does not take a floquet block", self.engine)));
            }
            (false, None) => {}
        }
        if self.run.checkpoint_interval == 0 {
            return Err(CliError::Config("run.checkpoint_interval must be at least 1".into()));
        }
        if self.outputs.formats.is_empty() {
            return Err(CliError::Config("outputs.formats is empty".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form: object keys sorted, so the hash
    /// does not depend on the order fields were written in.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
