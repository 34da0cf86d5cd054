use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("incompatible discretizations: spacing {left} vs {right} on overlapping windows")]
    IncompatibleGrid { left: f64, right: f64 },

    #[error("derivative order {order} needs at least {needed} grid nodes, found {found}")]
    TooFewNodes {
        order: usize,
        needed: usize,
        found: usize,
    },

    #[error("not representable on a grid: {0} (use the log-domain path)")]
    Unrepresentable(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("every sampled pair was degenerate")]
    DegenerateSamples,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("unknown map `{0}`")]
    UnknownMap(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
