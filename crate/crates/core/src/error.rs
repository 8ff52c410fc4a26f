use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structure failed its own verification while being built
    /// (group axioms, time-reversal property, ...).
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("subspace depleted: trace {trace:e} is below the floor {floor:e}")]
    SubspaceDepleted { trace: f64, floor: f64 },

    #[error("trace drift {drift:e} exceeds {limit:e} with dt = {dt}; use a smaller step")]
    StepSize { drift: f64, limit: f64, dt: f64 },

    #[error("density matrix is not positive: eigenvalue {eigenvalue:e}")]
    Positivity { eigenvalue: f64 },

    #[error("catalog integrity: {0}")]
    CatalogIntegrity(String),

    #[error("harness failure: {0}")]
    Harness(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
