use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent with another key.
    #[error("invalid configuration `{key}`: {constraint}")]
    Config { key: String, constraint: String },

    /// A weighting has no strictly positive entry left to sample from.
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// A document parsed but violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("stale artifact `{}`: {reason}", path.display())]
    StaleArtifact { path: PathBuf, reason: String },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("i/o error on `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            constraint: constraint.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } | Error::Validation(_) => 2,
            Error::StaleArtifact { .. } => 3,
            Error::ResourceLimit(_) => 4,
            Error::DegenerateDistribution(_) | Error::Contract(_) => 5,
            Error::Io { .. } => 1,
        }
    }
}
