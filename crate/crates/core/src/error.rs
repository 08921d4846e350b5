use thiserror::Error;

/// Errors raised by samplers, analytic evaluators and statistical tests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has vanishing Hilbert-Schmidt norm (tr AA† = {trace:e})")]
    ZeroMatrix { trace: f64 },

    #[error("eigensolver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rejection sampler stalled: {accepted} accepted out of {proposals} proposals")]
    EfficiencyFailure { accepted: u64, proposals: u64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("quadrature did not settle (residual {residual:e})")]
    QuadratureFailure { residual: f64 },

    #[error("values sum to zero")]
    ZeroSum,

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;
