use thiserror::Error;

/// Errors raised while loading, compiling or explaining a forest.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid feature space: {0}")]
    FeatureSpace(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("unknown class `{0}`")]
    UnknownClass(String),

    #[error("class index {index} out of range (forest has {count} classes)")]
    ClassIndex { index: usize, count: usize },

    #[error("world does not match the feature space: {0}")]
    WorldMismatch(String),

    #[error("sorting network needs a power-of-two input count, got {0}")]
    NotPowerOfTwo(usize),

    #[error("merge needs equal-length halves, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what} exceeded its cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("node budget of {0} decision-graph nodes exhausted")]
    NodeBudget(usize),

    #[error("time budget of {0:.3}s exhausted")]
    TimeBudget(f64),

    #[error("restriction leaves the root without any feasible edge")]
    InfeasibleRestriction,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant broken: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
