//! Thin numerical layer over nalgebra: SVD, Schur, Hermitian eigensolves and
//! the small utilities (clustering, multiset matching) shared by the modules.

use std::cmp::Ordering;

use nalgebra::linalg::{Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::{CMat, C64};

/// Hermitian acceptance: `|A - A*| <= HERMITIAN_TOL * max(1, |A|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues of a PSD matrix above `-PSD_CLAMP * |A|` are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;
/// Eigenvalues within `CLUSTER_TOL * |T|` are treated as one repeated eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-10;

pub fn tau(m: &CMat) -> C64 {
    m.trace() / m.nrows() as f64
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scale(m: &CMat, s: C64) -> CMat {
    m.map(|z| z * s)
}

pub fn shift(m: &CMat, lambda: C64) -> CMat {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        out[(i, i)] -= lambda;
    }
    out
}

/// `|U*U - I|` in operator norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    op_norm(&(u.adjoint() * u - identity(n)))
}

/// Largest modulus strictly below the diagonal.
pub fn lower_defect(r: &CMat) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..r.ncols() {
        for i in (j + 1)..r.nrows() {
            worst = worst.max(r[(i, j)].norm());
        }
    }
    worst
}

/// Frobenius norm of the lower triangle including the diagonal.
pub fn lower_with_diagonal_frobenius(r: &CMat) -> f64 {
    let mut acc = 0.0;
    for j in 0..r.ncols() {
        for i in j..r.nrows() {
            acc += r[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Complex Schur form `T = U R U*`, with the strictly lower part of `R`
/// verified negligible and then zeroed.
pub fn schur(t: &CMat) -> Result<(CMat, CMat)> {
    let n = t.nrows();
    let norm = op_norm(t);
    if norm == 0.0 {
        return Ok((identity(n), CMat::zeros(n, n)));
    }
    let schur = Schur::try_new(t.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::Eigensolver(format!("Schur iteration did not converge (n = {n})")))?;
    let (u, mut r) = schur.unpack();
    let defect = lower_defect(&r);
    if !(defect <= 1e-10 * norm) {
        return Err(Error::Eigensolver(format!(
            "Schur factor not triangular: subdiagonal {defect:e}"
        )));
    }
    for j in 0..n {
        for i in (j + 1)..n {
            r[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((u, r))
}

pub fn eigenvalues(t: &CMat) -> Result<Vec<C64>> {
    let (_, r) = schur(t)?;
    Ok((0..r.nrows()).map(|i| r[(i, i)]).collect())
}

pub fn spectral_radius(t: &CMat) -> Result<f64> {
    Ok(eigenvalues(t)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub fn check_hermitian(a: &CMat) -> Result<()> {
    let norm = op_norm(a);
    let defect = op_norm(&(a - a.adjoint()));
    let tolerance = HERMITIAN_TOL * norm.max(1.0);
    if defect > tolerance {
        return Err(Error::NotHermitian { defect, tolerance });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// decreasing order; columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_hermitian(a)?;
    let sym = (a + a.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(sym);
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Like [`hermitian_eigen`] but also requires positive semidefiniteness,
/// clamping tiny negative eigenvalues to zero.
pub fn psd_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let (mut values, vectors) = hermitian_eigen(a)?;
    let norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tolerance = -PSD_CLAMP * norm;
    for v in values.iter_mut() {
        if *v < tolerance {
            return Err(Error::NotPositive {
                eigenvalue: *v,
                tolerance,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((values, vectors))
}

/// `|T| = (T*T)^{1/2}` via the SVD.
pub fn abs(t: &CMat) -> CMat {
    let svd = t.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut out = CMat::zeros(t.nrows(), t.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let row = v_t.row(k);
        out += row.adjoint() * row * C64::new(s, 0.0);
    }
    out
}

/// Apply a real function to a Hermitian matrix through its eigendecomposition.
pub fn hermitian_function(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(a)?;
    let n = a.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        let col = vectors.column(k);
        out += col * col.adjoint() * C64::new(f(v), 0.0);
    }
    Ok(out)
}

/// Orthogonal projection onto the span of the first `k` columns of an
/// orthonormal basis.
pub fn leading_projection(basis: &CMat, k: usize) -> CMat {
    let n = basis.nrows();
    if k == 0 {
        return CMat::zeros(n, n);
    }
    let cols = basis.columns(0, k);
    cols * cols.adjoint()
}

/// Groups values whose single-linkage distance is at most `tol`. Groups are
/// returned in order of their first member; members keep input order.
pub fn cluster_values(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Lexicographic `(Re, Im)` order.
pub fn lex_cmp(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Largest pairing distance after greedily matching the globally closest
/// pairs of two equally sized multisets. `None` when the sizes differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    Some(worst)
}

/// Spectrum of `x` read off the diagonal of `basis* x basis`, valid when that
/// compression is upper triangular. Returns the diagonal together with the
/// largest strictly-lower entry so callers can check the premise.
///
/// Nilpotent parts are exactly the matrices whose generic eigenvalues are
/// ill-conditioned (perturbations of size `u` move them by `u^{1/n}`), so the
/// triangular frame is the only faithful way to read them in floating point.
pub fn triangular_spectrum(x: &CMat, basis: &CMat) -> (Vec<C64>, f64) {
    let w = basis.adjoint() * x * basis;
    let diag = (0..w.nrows()).map(|i| w[(i, i)]).collect();
    (diag, lower_defect(&w))
}
