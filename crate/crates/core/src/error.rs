use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("zero input: {0}")]
    ZeroInput(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected a non-archimedean or trivial place, got the archimedean place")]
    ArchimedeanPlace,
    #[error("unbounded domain: {0}")]
    UnboundedDomain(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("precision target {target} unattainable (best certified width {achieved})")]
    Precision { target: f64, achieved: f64 },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u64, u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("all draws degenerate")]
    AllDrawsDegenerate,
}

pub type Result<T> = std::result::Result<T, Error>;
