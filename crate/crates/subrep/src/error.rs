use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ambient space mismatch between operands")]
    AmbientMismatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of bounds for system of length {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("operation undefined on a trivial subspace")]
    TrivialSubspace,

    #[error("subspaces have a nontrivial intersection")]
    NontrivialIntersection,

    #[error("system not λ-contracting at x: residual ratio stalled at 1")]
    Stagnation { trace: Vec<f64> },

    #[error("solver iteration cap exceeded ({cap} iterations)")]
    SolverCap { cap: usize },

    #[error("solver failed to converge: {0}")]
    SolverFailure(String),

    #[error("replication schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("combinatorial cap exceeded: {0}")]
    CombinatorialCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
