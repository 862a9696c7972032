use std::io;

use thiserror::Error;

/// Errors raised by the routing library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula hit a pole (division by zero, log of zero).
    #[error("singularity: {0}")]
    Singularity(String),

    /// A closed form diverges at the requested parameters.
    #[error("divergence: {0}")]
    Divergence(String),

    /// Every candidate carried zero weight, so no distribution exists.
    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    /// Invalid configuration or generation parameters.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed network or config file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for failures of the filesystem rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
