use std::path::{Path, PathBuf};

use dpflab_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: Error },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Usage(String),

    #[error("audit failed for {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn file(path: &Path, source: Error) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 audit failure, 2 input or configuration, 3 synthesis, 4 instability.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::File { source: e, .. } => match e {
                Error::Infeasible { .. } | Error::Synthesis(_) | Error::NonConvergence { .. } | Error::EigenFailure => 3,
                Error::Unstable { .. } => 4,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::CheckFailed(_) => 1,
        }
    }
}
