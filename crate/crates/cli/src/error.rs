use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] bbgky_core::Error),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 invalid input, 3 resource limit, 4 numerical failure, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        use bbgky_core::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Core(E::InvalidArgument(_) | E::Parse(_)) => 2,
            Self::Core(E::ResourceLimit(_)) => 3,
            Self::Core(E::IllPosedFit(_) | E::Numerical(_)) => 4,
            Self::Io { .. } | Self::Verification(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
