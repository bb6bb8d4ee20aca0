use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::graph::ExportFormat;
use crate::policy::{resolve_dist, ChildCountDist, MarriageRatio};

/// A policy given by name or as an inline weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Named(String),
    Weights(Vec<f64>),
}

impl PolicySpec {
    pub fn resolve(&self) -> Result<ChildCountDist, CliError> {
        match self {
            PolicySpec::Named(name) => resolve_dist(name),
            PolicySpec::Weights(w) => ChildCountDist::new(w.clone()),
        }
        .map_err(|e| CliError::Input(format!("policy: {e}")))
    }
}

fn full_utilization() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Settings of a generational policy experiment, as read from a TOML
/// document or assembled from command-line flags.
///
/// ```toml
/// initial_n = 200
/// alpha = 0.9
/// policy = "0/3C"          # or an inline array: [0.5, 0.0, 0.5]
/// generations = 3
/// seed = 42
/// utilization = 1.0
/// output_dir = "out"
/// format = "edge-csv"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub initial_n: usize,
    pub alpha: f64,
    pub policy: PolicySpec,
    pub generations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "full_utilization")]
    pub utilization: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: ExportFormat,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    /// Check every field and resolve the policy.
    pub fn validate(&self) -> Result<(ChildCountDist, MarriageRatio), CliError> {
        if self.initial_n < 2 {
            return Err(CliError::Input("initial_n must be at least 2".into()));
        }
        if self.generations == 0 {
            return Err(CliError::Input("generations must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.utilization) {
            return Err(CliError::Input(format!(
                "utilization {} is outside [0, 1]",
                self.utilization
            )));
        }
        let alpha = MarriageRatio::new(self.alpha).map_err(|e| CliError::Input(e.to_string()))?;
        Ok((self.policy.resolve()?, alpha))
    }
}
