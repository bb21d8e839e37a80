//! Fuglede–Kadison determinants and the block identity for invariant
//! projections.

use serde::Serialize;

use crate::brown::{brown_measure_exact, SpectralMeasure};
use crate::error::{Error, Result};
use crate::linalg::{self, multiset_distance, op_norm};
use crate::matrix::{CMat, ComplexMatrix, C64};

/// Singular values at or below this fraction of `|T|` count as zero.
pub const SINGULAR_CUTOFF: f64 = 1e-14;

/// `exp(tau(log |T|))` from a list of singular values; `0` when any of them
/// is negligible relative to the largest.
pub fn fk_from_singular_values(sigma: &[f64]) -> f64 {
    let top = sigma.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || sigma.iter().any(|&s| s <= SINGULAR_CUTOFF * top) {
        return 0.0;
    }
    let mean_log = sigma.iter().map(|s| s.ln()).sum::<f64>() / sigma.len() as f64;
    mean_log.exp()
}

/// `Delta(T) = exp(tau(log |T|)) = |det T|^{1/n}`.
pub fn fk_determinant(t: &ComplexMatrix) -> f64 {
    fk_matrix(t.as_matrix())
}

pub(crate) fn fk_matrix(t: &CMat) -> f64 {
    fk_from_singular_values(&linalg::singular_values(t))
}

/// `tau(log(|T - lambda|^2 + eps))`, finite for every `eps > 0`.
pub fn regularized_log_det(t: &ComplexMatrix, lambda: C64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    Ok(regularized_log_det_matrix(t.as_matrix(), lambda, eps))
}

pub(crate) fn regularized_log_det_matrix(t: &CMat, lambda: C64, eps: f64) -> f64 {
    let sigma = linalg::singular_values(&linalg::shift(t, lambda));
    sigma.iter().map(|s| (s * s + eps).ln()).sum::<f64>() / sigma.len() as f64
}

/// `Delta(|X|^2 + c) = exp(tau(log(X*X + c)))` for `c > 0`.
pub(crate) fn fk_gram_shift(x: &CMat, c: f64) -> f64 {
    let sigma = linalg::singular_values(x);
    (sigma.iter().map(|s| (s * s + c).ln()).sum::<f64>() / sigma.len() as f64).exp()
}

/// Both sides of `Delta(T) = Delta(A)^{tau(p)} Delta(C)^{tau(1-p)}` and
/// `nu_T = tau(p) nu_A + tau(1-p) nu_C` for an invariant projection `p`,
/// with `A = pTp` on `range(p)` and `C` the compression to `range(1-p)`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockIdentityReport {
    pub rank: usize,
    pub det_lhs: f64,
    pub det_rhs: f64,
    /// Relative gap; zero when both sides vanish.
    pub det_gap: f64,
    pub measure_lhs: SpectralMeasure,
    pub measure_rhs: SpectralMeasure,
    /// Largest distance between matched atoms, each atom counted with
    /// its multiplicity.
    pub measure_gap: f64,
}

impl BlockIdentityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.det_gap <= tol && self.measure_gap <= tol
    }
}

/// Compression of `t` to the range of an orthogonal projection and to its
/// complement, returned as `(A, C, basis)` where the first `rank` columns of
/// `basis` span `range(p)`.
pub(crate) fn split_by_projection(t: &CMat, p: &CMat) -> Result<(CMat, CMat, CMat, usize)> {
    let n = t.nrows();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.nrows(),
        });
    }
    let idempotence = op_norm(&(p * p - p));
    if idempotence > 1e-8 {
        return Err(Error::param("p", format!("not a projection (|p^2 - p| = {idempotence:e})")));
    }
    let (values, basis) = linalg::hermitian_eigen(p)?;
    let rank = values.iter().filter(|&&v| v > 0.5).count();
    let norm = op_norm(t);
    let defect = op_norm(&(t * p - p * t * p));
    let tolerance = 1e-8 * norm;
    if defect > tolerance {
        return Err(Error::NotInvariant { defect, tolerance });
    }
    let w = basis.adjoint() * t * &basis;
    let a = w.view((0, 0), (rank, rank)).into_owned();
    let c = w.view((rank, rank), (n - rank, n - rank)).into_owned();
    Ok((a, c, basis, rank))
}

pub fn block_det_identity_check(t: &ComplexMatrix, p: &CMat) -> Result<BlockIdentityReport> {
    let n = t.dim();
    let (a, c, _, rank) = split_by_projection(t.as_matrix(), p)?;
    let det_lhs = fk_determinant(t);
    let tau_p = rank as f64 / n as f64;
    // Delta_{0}(0)^0 = 1 for the empty corner.
    let corner = |m: &CMat, weight: f64| if m.nrows() == 0 { 1.0 } else { fk_matrix(m).powf(weight) };
    let det_rhs = corner(&a, tau_p) * corner(&c, 1.0 - tau_p);
    let det_gap = if det_lhs == 0.0 && det_rhs == 0.0 {
        0.0
    } else {
        (det_lhs - det_rhs).abs() / det_lhs.abs().max(det_rhs.abs())
    };

    let measure_lhs = brown_measure_exact(t)?;
    let mut spectrum_rhs = Vec::with_capacity(n);
    if rank > 0 {
        spectrum_rhs.extend(linalg::eigenvalues(&a)?);
    }
    if rank < n {
        spectrum_rhs.extend(linalg::eigenvalues(&c)?);
    }
    let measure_rhs = SpectralMeasure::counting(&spectrum_rhs, linalg::CLUSTER_TOL * t.op_norm());
    let measure_gap = multiset_distance(&measure_lhs.expanded(n), &measure_rhs.expanded(n))
        .unwrap_or(f64::INFINITY);
    Ok(BlockIdentityReport {
        rank,
        det_lhs,
        det_rhs,
        det_gap,
        measure_lhs,
        measure_rhs,
        measure_gap,
    })
}
