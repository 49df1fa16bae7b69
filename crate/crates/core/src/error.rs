use std::path::PathBuf;

use thiserror::Error;

use crate::channel::PathParams;
use crate::numkit::SingularTriplet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("power iteration did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Box<SingularTriplet>,
    },

    /// An estimation run stopped early; `partial` holds every path estimated
    /// before the failure.
    #[error("estimation failed after {} path estimates: {source}", partial.len())]
    Estimation {
        #[source]
        source: Box<Error>,
        partial: Vec<PathParams>,
    },

    #[error("phase of a zero-magnitude sum is undefined")]
    UndefinedPhase,

    #[error("least-squares system is rank deficient: QP = {qp} < n_t n_r = {n}")]
    RankDeficient { qp: usize, n: usize },

    #[error("quadrature did not reach tolerance {target:.1e} (achieved {achieved:.1e})")]
    Quadrature { target: f64, achieved: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{failed} of {trials} trials failed, above the 1% limit")]
    FailureRate { failed: usize, trials: usize },

    #[error("{}: {source}", path.display())]
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
}
