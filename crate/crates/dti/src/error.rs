//! Crate-wide error type with CLI exit-code mapping.

use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
///
/// Every variant maps onto one of three CLI exit codes:
/// 1 = validation/parse error, 2 = runtime/data error, 3 = I/O error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input violates a declared invariant or precondition.
    #[error("{0}")]
    Validation(String),

    /// A file could not be parsed; carries location when known.
    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Runtime failure on otherwise valid inputs (missing upstream
    /// artifact, network failure, unlabeled data, ...).
    #[error("{0}")]
    Data(String),

    /// Training aborted because the loss became non-finite.
    #[error("training diverged at epoch {epoch} (learning_rate={learning_rate}): loss is not finite")]
    Diverged { epoch: usize, learning_rate: f64 },

    /// Filesystem failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 validation, 2 runtime/data, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } => 1,
            Error::Data(_) | Error::Diverged { .. } => 2,
            Error::Io { .. } => 3,
        }
    }

    /// Short machine-readable kind tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::Data(_) => "data",
            Error::Diverged { .. } => "diverged",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
