use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: |A - A*| = {defect:e} exceeds {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below {tolerance:e}")]
    NotPositive { eigenvalue: f64, tolerance: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("invariance violated: |Tp - pTp| = {defect:e} exceeds {tolerance:e}")]
    NotInvariant { defect: f64, tolerance: f64 },

    #[error("invalid projection nest: {0}")]
    InvalidNest(String),

    #[error("point {re} + {im}i lies outside the curve square of half-side {half_side}")]
    OutsideSquare { re: f64, im: f64, half_side: f64 },

    #[error("every curve anchor places an eigenvalue cluster in the first cell")]
    AnchorExhausted,

    #[error("power {power} leaves the representable range (log10 scale {log10_scale:.1})")]
    RangeGuard { power: usize, log10_scale: f64 },

    #[error("density grid bounds do not cover the spectrum: {0}")]
    GridBounds(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidMatrix(_) => "invalid-matrix",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotHermitian { .. } => "not-hermitian",
            Error::NotPositive { .. } => "not-positive",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Eigensolver(_) => "eigensolver",
            Error::NotInvariant { .. } => "not-invariant",
            Error::InvalidNest(_) => "invalid-nest",
            Error::OutsideSquare { .. } => "outside-square",
            Error::AnchorExhausted => "anchor-exhausted",
            Error::RangeGuard { .. } => "range-guard",
            Error::GridBounds(_) => "grid-bounds",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }
}
