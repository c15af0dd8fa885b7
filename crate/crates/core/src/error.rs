//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix must be square with dimension >= 1, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("operator is not anti-Hermitian: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotAntiHermitian { defect: f64, tolerance: f64 },

    #[error("not a valid density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("total dimension {requested} exceeds the configured maximum {max}")]
    DimensionOverflow { requested: usize, max: usize },

    #[error("factor index {index} out of range for {count} factors")]
    FactorIndexOutOfRange { index: usize, count: usize },

    #[error("invalid factor subset: {reason}")]
    InvalidFactorSubset { reason: String },

    #[error("eigensolver failed to converge")]
    EigenSolverFailure,

    #[error("numerical invariant violated: {what} (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    InvariantViolation {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid measurement resolution: {reason}")]
    InvalidResolution { reason: String },

    #[error("invalid partition: {reason}")]
    InvalidPartition { reason: String },

    #[error("invalid scenario: {reason}")]
    InvalidScenario { reason: String },

    #[error("eigenvalue product collision: {reason}; the closed form does not apply")]
    ProductDegeneracy { reason: String },

    #[error("commutator is numerically zero; no witness state exists")]
    ZeroCommutator,
}
