//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input is not Hermitian (relative defect {defect:.3e})")]
    NonHermitianInput { defect: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("product vector is not in the zero set (|<e,f|W|e,f>| = {magnitude:.3e})")]
    NotAKernelVector { magnitude: f64 },

    #[error("first-order expansion term does not vanish (magnitude {magnitude:.3e})")]
    FirstOrderNonzero { magnitude: f64 },

    #[error("zero set is empty")]
    EmptyZeroSet,

    #[error("operator is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("support of the subtracted operator overlaps a zero (overlap {overlap:.3e})")]
    SupportOverlapsZeros { overlap: f64 },

    #[error("subtracted operator is numerically zero")]
    ZeroOperator,

    #[error("operator is not block-positive (min product expectation {min_value:.3e})")]
    NotBlockPositive { min_value: f64 },

    #[error("unsupported local dimensions {da}x{db}")]
    UnsupportedDimension { da: usize, db: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
