use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A formula has a vanishing denominator or singular prefactor for these inputs.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("Jacobi eigenvalue iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
