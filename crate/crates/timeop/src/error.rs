use thiserror::Error;

/// Errors produced by grid construction, operator assembly and the report
/// drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("grid mismatch: operands live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("operator `{symbol}` is not Hermitian: relative defect {defect:.3e} exceeds {tolerance:.1e}")]
    NotHermitian {
        symbol: String,
        defect: f64,
        tolerance: f64,
    },

    #[error("eigenvalue {value:.6e} below clamp threshold {threshold:.6e}; square root undefined")]
    NegativeEigenvalue { value: f64, threshold: f64 },

    #[error("eigensolver failed to converge for eigenvalue index {index}")]
    EigenNoConvergence { index: usize },

    #[error("function violates the operator domain: {0}")]
    DomainViolation(String),

    #[error("point outside the closed upper half-plane: Im t = {0:.3e}")]
    LowerHalfPlane(f64),

    #[error("invalid time node: {0}")]
    InvalidTimeNode(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
