use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The QR iteration ran out of budget. `partial` holds the eigenvalues
    /// that had already deflated when the budget was exhausted.
    #[error("eigensolver did not converge after {iterations} QR iterations ({} of {dim} eigenvalues deflated)", partial.len())]
    NoConvergence {
        iterations: usize,
        dim: usize,
        partial: Vec<Complex64>,
    },

    #[error("eigenpair residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("inconsistent spectrum: {0}")]
    Consistency(String),

    #[error("at gamma = {gamma}: {source}")]
    Probe {
        gamma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn at_gamma(gamma: f64, source: Error) -> Self {
        Error::Probe {
            gamma,
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::Residual { .. } | Error::Consistency(_) => true,
            Error::Probe { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
