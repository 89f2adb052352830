use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter outside the admissible set of the curvature framework.
    #[error("rejected parameter: {0}")]
    RejectedParameter(String),

    #[error("invalid constant: {0}")]
    InvalidConstant(String),

    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("spectrum incomplete: need eigenvalues up to {needed:e} but only complete below {complete_below:e}; widen l_max or k_per_mode")]
    Incomplete { needed: f64, complete_below: f64 },

    #[error("singular linear system at row {0}")]
    Singular(usize),

    #[error("non-positive solution value {value:e} at node {node}")]
    NonPositive { node: usize, value: f64 },

    #[error("degenerate audit: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
