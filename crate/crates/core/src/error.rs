use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures of the numerical operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid has {nodes} nodes, over the node budget of {budget}")]
    NodeBudget { nodes: usize, budget: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid function does not belong to the operator's grid")]
    GridMismatch,

    #[error("function is nonzero on inactive node {node}")]
    Support { node: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("form bound violation: q = {q} >= 1 (C = {c})")]
    KlmnViolation { q: f64, c: f64 },

    #[error("operator plus shift is not positive definite (smallest eigenvalue {lambda_min})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("active dimension {dim} exceeds the dense budget {budget}")]
    DenseBudget { dim: usize, budget: usize },

    #[error("eigensolver did not converge; best residuals {residuals:?}")]
    NotConverged { residuals: Vec<f64> },

    #[error("operation needs a full spectral decomposition")]
    PartialSpectrum,

    #[error("scalar map is not finite at eigenvalue {eigenvalue}")]
    UndefinedFunction { eigenvalue: f64 },

    #[error("eigenvalue {value} lies within {tolerance} of the interval boundary")]
    BoundaryTie { value: f64, tolerance: f64 },

    #[error("could not bracket the dual maximizer; scanned (beta, dual value) = {profile:?}")]
    Bracketing { profile: Vec<(f64, f64)> },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
