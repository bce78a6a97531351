use std::path::PathBuf;

/// Errors raised by the model, the filters and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every importance weight vanished.
    #[error("weight degeneracy: {0}")]
    Degenerate(String),

    /// A numerical routine failed (factorization, non-finite values).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Invalid configuration or command-line usage.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file.
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code used by the command-line harness.
    ///
    /// 1 for usage and configuration problems, 2 for I/O, 3 for numerical
    /// failures that happen outside a filter run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) => 1,
            Error::Io { .. } | Error::Parse { .. } => 2,
            Error::Degenerate(_) | Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
