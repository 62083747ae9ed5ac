use thiserror::Error;

/// Errors raised by the solver, grids and special functions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("grid structure: {0}")]
    Structure(String),

    #[error("closed form rejected: eigen-equation residual {residual:.3e} exceeds {tolerance:.1e}")]
    Construction { residual: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("Ermakov-Pinney solution became singular near t = {t}: {reason}")]
    Singularity { t: f64, reason: String },

    #[error("SL(2,R) coefficient identity violated: alpha*beta - gamma^2 - 1 = {0:.3e}")]
    Consistency(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("profile table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn structure(msg: impl Into<String>) -> Error {
    Error::Structure(msg.into())
}
