//! Versioned run configuration.

use serde::Deserialize;
use sha2::{Digest, Sha256};
use twophase_core::config::ModelConfig;
use twophase_core::evolution::{PerturbationSpec, SchemeOptions};
use twophase_core::stationary::GridSpec;
use twophase_core::Regime;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Classify,
    Stationary,
    Evolve,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    #[serde(default = "default_parameter_sets")]
    pub parameter_sets: usize,
    #[serde(default = "default_inequality_functions")]
    pub inequality_functions: usize,
}

fn default_parameter_sets() -> usize {
    1000
}

fn default_inequality_functions() -> usize {
    100
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            parameter_sets: default_parameter_sets(),
            inequality_functions: default_inequality_functions(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub model: ModelConfig,
    /// When present it must match the subcommand.
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub force_regime: Option<Regime>,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub scheme: SchemeOptions,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub report_every: Option<f64>,
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A parsed configuration together with the SHA-256 of its source text.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
}

impl Loaded {
    pub fn read(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                config.schema
            )));
        }
        let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
        Ok(Self { config, hash })
    }

    pub fn expect_scenario(&self, scenario: Scenario) -> Result<()> {
        match self.config.scenario {
            Some(s) if s != scenario => Err(CliError::Config(format!(
                "config is for scenario {s:?}, not {scenario:?}"
            ))),
            _ => Ok(()),
        }
    }
}
