use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {key}: {message}")]
    Config { key: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(
        "quadrature did not converge: achieved error {achieved:.3e} (requested {requested:.3e})"
    )]
    Quadrature { achieved: f64, requested: f64 },

    #[error("eigenvector matrix is ill-conditioned (condition number {condition:.3e}); fall back to RK4")]
    IllConditioned { condition: f64 },

    #[error("trace drifted by {drift:.3e} at t = {time:.6} ps with dt = {dt:.3e} ps; reduce the step size")]
    TraceDrift { drift: f64, time: f64, dt: f64 },

    #[error(
        "null space of the generator has dimension {multiplicity}; no unique stationary state"
    )]
    DegenerateNullSpace { multiplicity: usize },

    #[error("generator has no decaying mode")]
    NoDecayingMode,
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
