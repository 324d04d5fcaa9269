//! TOML run configuration.
//!
//! ```toml
//! agents = 2          # alias: M
//! signals = 1000      # alias: N
//! decoys = 50         # alias: k; default max(32, ceil(0.05 N))
//! alpha = 0.6
//! p = 0.1
//! eta_t = 0.05
//! memory_mode = "quantum_memory"   # or "no_memory"
//! reconstruction = "full_parity"   # or "first_last_xor"
//! seed = 7
//! trials = 100
//! output_path = "out.ndjson"
//! output_format = "json"           # or "csv"
//!
//! [noise]
//! depolarizing = 0.0
//! loss = 0.0
//!
//! [[attacks]]
//! line = 1
//! policy = "random_zx"             # fixed_z | fixed_x | random_zx
//! ```
//!
//! Only `agents` and `signals` are required. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{NoiseModel, NoiseSpec};
use crate::engine::{default_decoys, AttackPlacement, EngineError, MemoryMode, ReconstructionRule, SessionConfig, DEFAULT_ETA_T, DEFAULT_P};
use crate::states::SchmidtParam;

pub const DEFAULT_ALPHA: f64 = 0.6;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Newline-delimited JSON records.
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "M")]
    agents: Option<usize>,
    #[serde(alias = "N")]
    signals: Option<usize>,
    #[serde(alias = "k")]
    decoys: Option<usize>,
    alpha: Option<f64>,
    p: Option<f64>,
    eta_t: Option<f64>,
    memory_mode: Option<MemoryMode>,
    #[serde(default)]
    attacks: Vec<AttackPlacement>,
    noise: Option<NoiseSpec>,
    reconstruction: Option<ReconstructionRule>,
    seed: Option<u64>,
    trials: Option<usize>,
    output_path: Option<PathBuf>,
    output_format: Option<OutputFormat>,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub session: SessionConfig,
    pub trials: usize,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Advisory messages; the config is still usable.
    pub warnings: Vec<String>,
}

impl ConfigFile {
    pub fn new(session: SessionConfig) -> Self {
        ConfigFile { session, trials: 1, output_path: None, output_format: OutputFormat::Json, warnings: Vec::new() }
    }
}

pub fn parse_config(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ConfigFile, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let agents = raw.agents.ok_or_else(|| invalid("agents", "missing required key"))?;
    let signals = raw.signals.ok_or_else(|| invalid("signals", "missing required key"))?;
    let alpha = raw.alpha.unwrap_or(DEFAULT_ALPHA);
    let alpha = SchmidtParam::new(alpha).map_err(|_| invalid("alpha", "alpha must lie in (0,1)"))?;
    let noise = raw.noise.unwrap_or_default();
    let noise = NoiseModel::try_from(noise).map_err(|e| invalid("noise", e.to_string()))?;

    let session = SessionConfig {
        agents,
        signals,
        decoys: raw.decoys.unwrap_or_else(|| default_decoys(signals)),
        alpha,
        p: raw.p.unwrap_or(DEFAULT_P),
        eta_t: raw.eta_t.unwrap_or(DEFAULT_ETA_T),
        memory_mode: raw.memory_mode.unwrap_or_default(),
        attacks: raw.attacks,
        noise,
        reconstruction: raw.reconstruction.unwrap_or_default(),
        seed: raw.seed.unwrap_or(0),
    };
    let warnings = session.validate().map_err(|e| match e {
        EngineError::InvalidConfig { field, message } => invalid(field, message),
        other => invalid("config", other.to_string()),
    })?;
    let trials = raw.trials.unwrap_or(1);
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    Ok(ConfigFile {
        session,
        trials,
        output_path: raw.output_path,
        output_format: raw.output_format.unwrap_or_default(),
        warnings,
    })
}
