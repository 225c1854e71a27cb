use thiserror::Error;

/// Errors produced while building or querying a diagram.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CivdError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} (supported: 1..={max})", max = crate::geometry::MAX_DIM)]
    UnsupportedDimension(usize),
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("empty point set")]
    EmptyInput,
    #[error("cannot split a box with zero edge length")]
    ZeroSizeBox,
    #[error("duplicate input points at indices {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("query point coincides with input point {0}")]
    SingularQuery(usize),
    #[error("value {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },
    #[error("no error tolerance keeps the internal tolerance below 1/2 for epsilon = {0}")]
    NoSolution(f64),
    #[error("brute-force oracle infeasible for n = {n} (cap {cap})")]
    TooLarge { n: usize, cap: usize },
    #[error("decomposition exceeded the cap of {0} box nodes")]
    TooManyCells(usize),
    #[error("density tracking was not enabled for this decomposition")]
    MissingObserver,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = CivdError> = std::result::Result<T, E>;
