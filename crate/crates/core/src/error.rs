use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two evaluation points coincide where a kernel or distance needs `x != y`.
    #[error("degenerate pair: the two points coincide")]
    DegeneratePair,

    #[error("derivative unavailable for the {0} wavelet")]
    DerivativeUnavailable(&'static str),

    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed {kind} data: {reason}")]
    Format { kind: &'static str, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
