use thiserror::Error;

use crate::integrator::IntegrationFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("t = {t} lies before the schedule start t0 = {t0}")]
    Domain { t: f64, t0: f64 },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("power iteration did not converge in {iterations} iterations (last Rayleigh quotient {rayleigh})")]
    NoConvergence { iterations: usize, rayleigh: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error(transparent)]
    Integration(#[from] Box<IntegrationFailure>),

    #[error("rate fit needs at least 8 usable points, found {0}")]
    InsufficientData(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
