use thiserror::Error;

/// Crate-wide error type. Numeric routines return `Domain`/`Dimension` errors
/// for malformed inputs, `Infeasible` when a constraint (cost budget, covering
/// feasibility) rules an input out, and `Resource` when an enumeration would
/// exceed a hard cap.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("not a valid pmf: {0}")]
    InvalidPmf(String),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("load error: {0}")]
    Load(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("correlated state law: {0}")]
    CorrelatedStates(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
