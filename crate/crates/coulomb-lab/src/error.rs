use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular evaluation: coincident points")]
    Singular,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("total charge {total} too large for growth margin {limit}")]
    ChargeTooLarge { total: f64, limit: f64 },
    #[error("beta = {0} outside (0, 1]")]
    BetaOutOfRange(f64),
    #[error("delta = {delta} too large for epsilon = {epsilon}")]
    DeltaTooLarge { delta: f64, epsilon: f64 },
    #[error("potential not admissible: {0}")]
    Inadmissible(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("measure carries atoms; energy is infinite")]
    Atoms,
    #[error("Gram matrix not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("convention mismatch: {0}")]
    Convention(String),
    #[error("chain accepted no moves")]
    ZeroAcceptance,
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("smoothness order s = {0} must exceed 1")]
    SmoothnessOrder(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
