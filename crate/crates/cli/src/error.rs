use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] solgeo::Error),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VIOLATED: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use solgeo::Error as E;
        match self {
            Self::Usage(_) | Self::Read { .. } | Self::Parse { .. } => EXIT_USAGE,
            Self::Core(E::Eigensolver(_) | E::RecursionDepth(_) | E::SamplerExhausted { .. } | E::Json(_)) => EXIT_INTERNAL,
            Self::Core(_) => EXIT_USAGE,
            Self::Write { .. } | Self::Csv(_) | Self::Pool(_) => EXIT_INTERNAL,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
