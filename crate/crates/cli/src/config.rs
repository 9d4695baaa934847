//! The JSON config file and how it combines with flags.

use std::path::{Path, PathBuf};

use cgforge::linker::LinkerConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "CGFORGE_SEED";

/// Every setting a run can take from a file. Flags given on the command
/// line win over these.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Fills per (base, template) pair; 0 means no cap.
    pub cap_per_pair: Option<usize>,
    pub rules: Option<PathBuf>,
    /// `rule` or `external`.
    pub generator: Option<String>,
    /// External generator program and its arguments.
    pub command: Option<Vec<String>>,
    pub timeout_ms: Option<u64>,
    pub concurrency: Option<usize>,
    pub store: Option<PathBuf>,
    pub port: Option<u16>,
    pub static_dir: Option<PathBuf>,
    pub linker: Option<LinkerConfig>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Seed precedence: environment, then flag, then config, then 0.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag.or(config).unwrap_or(0)),
    }
}

/// A flag value, else the config value, else an error naming the flag.
pub fn pick<T: Clone>(flag: &Option<T>, config: &Option<T>, name: &str) -> Result<T, CliError> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| CliError::Usage(format!("--{name} is required (flag or config)")))
}
