//! Normal plus nilpotent decomposition of square complex matrices along a
//! nest of invariant subspaces ordered by a space-filling curve, with the
//! determinant, Brown measure and majorization machinery around it.

pub mod brown;
pub mod config;
pub mod curve;
pub mod decompose;
pub mod det;
pub mod ensemble;
pub mod error;
pub mod expectation;
pub mod hs;
pub mod jacobi;
pub mod linalg;
pub mod majorization;
pub mod matrix;
pub mod nest;
pub mod report;
pub mod schur;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
pub use matrix::{normalized_trace, CMat, ComplexMatrix, C64};
