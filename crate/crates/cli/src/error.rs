use std::path::PathBuf;

use polarnet_core::PolarError;

use crate::config::ConfigErrors;
use crate::stats::StatsError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read config {}: {source}", path.display())]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {}: {message}", path.display())]
    ConfigParse { path: PathBuf, message: String },
    #[error("invalid config:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] PolarError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("cannot start worker pool: {0}")]
    Workers(String),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigRead { .. } | Self::ConfigParse { .. } | Self::Config(_) => 2,
            _ => 1,
        }
    }
}
