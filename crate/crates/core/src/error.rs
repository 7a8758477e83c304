use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({u}, {v}) out of range for {n} nodes")]
    EdgeOutOfRange { u: usize, v: usize, n: usize },

    #[error("operation `{0}` requires strictly positive edge weights")]
    SignedWeights(&'static str),

    #[error("graph is disconnected ({0})")]
    Disconnected(&'static str),

    #[error("graph too small: need at least {need} nodes, got {got}")]
    TooSmall { need: usize, got: usize },

    #[error("dimension mismatch in `{op}`: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("scaling parameter mu must be positive, got {0}")]
    MuNotPositive(f64),

    #[error("matrix is not symmetric: `{0}` requires a symmetric input")]
    NotSymmetric(&'static str),

    #[error("matrix is not positive definite (failed at pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("zero or negative pivot {value} at elimination step {step} (threshold {threshold})")]
    ZeroPivot {
        step: usize,
        value: f64,
        threshold: f64,
    },

    #[error("sparsifier is disconnected or not spanning")]
    SparsifierDisconnected,

    #[error("degenerate hierarchy: {0}")]
    DegenerateHierarchy(&'static str),

    #[error("preconditioning matrix nullspace is larger than span{{1}} (graph disconnected)")]
    NullspaceTooLarge,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
