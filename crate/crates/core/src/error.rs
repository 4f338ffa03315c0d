//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("non-finite matrix entry encountered")]
    NonFinite,

    #[error("integration failed near t = {t}: step size underflow")]
    IntegrationFailure { t: f64 },

    #[error("quadrature did not converge: best estimate difference {achieved:.3e}")]
    QuadratureNoConvergence { achieved: f64 },

    #[error("commutator series did not converge after {terms} terms: last term norm {last_term_norm:.3e}")]
    SeriesDiverged { terms: usize, last_term_norm: f64 },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scan failed: {failed} of {total} objective evaluations errored")]
    ScanFailure { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, CoreError>;
