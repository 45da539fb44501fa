//! Batch front-end: a JSON scenario in, deterministic CSV/JSON artifacts
//! and a content manifest out.

pub mod artifacts;
pub mod config;
pub mod pipeline;

use std::path::Path;

use thiserror::Error;

pub use artifacts::{Artifact, Manifest};
pub use config::{Overrides, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 1 for anything the user can fix in the invocation, 2 for numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}

impl From<incoherence::Error> for CliError {
    fn from(e: incoherence::Error) -> Self {
        Self::Numerical(e.to_string())
    }
}

/// Reads, parses and applies overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut config = ScenarioConfig::from_json(&text)?;
    config.apply_overrides(overrides)?;
    Ok(config)
}

fn base_dir(config_path: &Path) -> &Path {
    config_path.parent().unwrap_or_else(|| Path::new("."))
}

/// Checks a config without computing anything expensive.
pub fn validate(config_path: &Path, overrides: &Overrides) -> Result<pipeline::Plan, CliError> {
    let config = load_config(config_path, overrides)?;
    pipeline::Plan::prepare(&config, base_dir(config_path))
}

/// Runs a config and writes its artifacts plus `manifest.json` into `out_dir`.
pub fn run(config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Manifest, CliError> {
    faer::set_global_parallelism(faer::Par::Seq);
    let config = load_config(config_path, overrides)?;
    let plan = pipeline::Plan::prepare(&config, base_dir(config_path))?;
    let artifacts = plan.execute()?;
    artifacts::write_all(out_dir, &artifacts, config_hash(&config)?)
}

/// SHA-256 of the effective config, overrides included, in canonical JSON.
pub fn config_hash(config: &ScenarioConfig) -> Result<String, CliError> {
    let bytes = serde_json::to_vec(config).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(artifacts::sha256_hex(&bytes))
}
