use std::path::{Path, PathBuf};

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const NON_CONVERGENCE: u8 = 4;
    pub const IO: u8 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    /// Parse or validation failure; the message names the offending field.
    #[error("{0}")]
    Validation(String),

    #[error("optimization did not converge: {0}")]
    NonConvergence(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0} verification suite(s) failed")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::NonConvergence(_) => exit::NON_CONVERGENCE,
            CliError::Io { .. } => exit::IO,
            CliError::VerifyFailed(_) => exit::VERIFY_FAILED,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Prefixes a validation message with the file it came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Validation(m) => CliError::Validation(format!("{}: {}", path.display(), m)),
            other => other,
        }
    }
}

impl From<qtl_core::Error> for CliError {
    fn from(e: qtl_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
