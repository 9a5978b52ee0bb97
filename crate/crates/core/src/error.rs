//! Error type shared by all modules.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("operator is not {expected}: deviation {deviation:e} exceeds tolerance {tol:e}")]
    Flavor {
        expected: &'static str,
        deviation: f64,
        tol: f64,
    },

    #[error("unsupported system: {0}")]
    UnsupportedSystem(String),

    #[error("unsupported waveform layout: {0}")]
    UnsupportedLayout(String),

    #[error("closure rank indeterminate: projector residual {0:e} exceeds stability bound")]
    IndeterminateClosure(f64),

    #[error("non-finite value encountered during {0}")]
    NonFinite(&'static str),

    #[error("synthesis failed at eigenvector {index}: {reason}")]
    Synthesis { index: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<V> = std::result::Result<V, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
