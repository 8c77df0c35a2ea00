use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants fall into the four classes the command-line runner maps to
/// exit codes: configuration, data validation, I/O and internal invariants.
#[derive(Debug, Error)]
pub enum OrlError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, OrlError>;

impl OrlError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        OrlError::Config(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        OrlError::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        OrlError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(OrlError::DimensionMismatch {
                context,
                expected,
                actual,
            })
        }
    }

    /// Process exit code: 1 usage/config, 2 data/validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            OrlError::Config(_) => 1,
            OrlError::DimensionMismatch { .. }
            | OrlError::InvalidInput(_)
            | OrlError::Parse { .. }
            | OrlError::Invariant(_) => 2,
            OrlError::Io { .. } => 3,
        }
    }
}
