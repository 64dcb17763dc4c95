use thiserror::Error;

/// Every failure the library reports. [`Error::code`] gives the stable
/// machine-readable name used in JSON reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level 0 must contain exactly one vertex, found {found}")]
    MissingRoot { found: usize },
    #[error("vertex {vertex} at level {level} has no {direction} edges")]
    EmptyFiber {
        level: usize,
        vertex: String,
        direction: &'static str,
    },
    #[error("bad edge order at {key}: {reason}")]
    BadOrder { key: String, reason: String },
    #[error("bad measure at {vertex}: {reason}")]
    BadMeasure { vertex: String, reason: String },
    #[error("malformed diagram: {0}")]
    MalformedDiagram(String),
    #[error("level {requested} exceeds constructed depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("paths are not tail-compatible: {0}")]
    IncompatiblePaths(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("range error: {0}")]
    RangeError(String),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("truncation boundary reached at the all-maximal word")]
    TruncationBoundary,
    #[error("point {0} lies outside the tower")]
    PointOutsideTower(String),
    #[error("point {0} lies on the top level; the stage map is undefined there")]
    TopLevel(String),
    #[error("budget exceeded: {needed} monomials requested, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingRoot { .. } => "MissingRoot",
            Error::EmptyFiber { .. } => "EmptyFiber",
            Error::BadOrder { .. } => "BadOrder",
            Error::BadMeasure { .. } => "BadMeasure",
            Error::MalformedDiagram(_) => "MalformedDiagram",
            Error::DepthExceeded { .. } => "DepthExceeded",
            Error::IncompatiblePaths(_) => "IncompatiblePaths",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::RangeError(_) => "RangeError",
            Error::InsufficientDepth(_) => "InsufficientDepth",
            Error::TruncationBoundary => "TruncationBoundary",
            Error::PointOutsideTower(_) => "PointOutsideTower",
            Error::TopLevel(_) => "TopLevel",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
