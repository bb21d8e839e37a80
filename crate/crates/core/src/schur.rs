//! Schur triangularization with a prescribed eigenvalue order.
//!
//! The diagonal of the triangular factor is permuted by adjacent unitary
//! swaps of 1x1 blocks, the same strategy as LAPACK's `ztrexc`.

use std::cmp::Ordering;

use crate::error::Result;
use crate::linalg::{self, lex_cmp};
use crate::matrix::{CMat, ComplexMatrix, C64};

#[derive(Clone, Debug)]
pub struct OrderedSchur {
    /// Unitary `U` with `T = U R U*`.
    pub unitary: CMat,
    /// Upper triangular `R`.
    pub triangular: CMat,
    /// `perm[i]` is the position, in the unreordered Schur diagonal, of the
    /// eigenvalue now sitting at `R[i][i]`.
    pub perm: Vec<usize>,
}

impl OrderedSchur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.triangular.nrows())
            .map(|i| self.triangular[(i, i)])
            .collect()
    }
}

/// Schur form whose diagonal is sorted by `key`. Ties under `key` fall back
/// to `(Re, Im)` lexicographic order and then to the original position.
pub fn ordered_schur<F>(t: &ComplexMatrix, key: F) -> Result<OrderedSchur>
where
    F: Fn(&C64, &C64) -> Ordering,
{
    let (mut unitary, mut triangular) = linalg::schur(t.as_matrix())?;
    let n = t.dim();
    let diag: Vec<C64> = (0..n).map(|i| triangular[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        key(&diag[i], &diag[j])
            .then_with(|| lex_cmp(&diag[i], &diag[j]))
            .then(i.cmp(&j))
    });
    let mut rank = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }
    let perm = reorder(&mut unitary, &mut triangular, &rank);
    Ok(OrderedSchur {
        unitary,
        triangular,
        perm,
    })
}

/// Stable bubble sort of the Schur diagonal by `rank`: entry `i` of the
/// current diagonal moves ahead of its neighbour only if its rank is strictly
/// smaller, so entries of equal rank never exchange. Returns the resulting
/// permutation of original positions.
pub(crate) fn reorder(unitary: &mut CMat, triangular: &mut CMat, rank: &[usize]) -> Vec<usize> {
    let n = rank.len();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut swapped = false;
        for k in 0..n.saturating_sub(1) {
            if rank[perm[k + 1]] < rank[perm[k]] {
                swap_adjacent(unitary, triangular, k);
                perm.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    perm
}

/// Exchange the diagonal entries `k` and `k + 1` of an upper triangular
/// matrix by a Givens similarity, updating the Schur vectors alongside.
fn swap_adjacent(unitary: &mut CMat, r: &mut CMat, k: usize) {
    let a = r[(k, k)];
    let b = r[(k, k + 1)];
    let c = r[(k + 1, k + 1)];
    if a == c {
        return;
    }
    // (b, c - a) spans the eigenvector of the 2x2 block for eigenvalue c.
    let d = c - a;
    let nrm = b.norm().hypot(d.norm());
    let (x, y) = (b / nrm, d / nrm);
    // G = [[x, -conj(y)], [y, conj(x)]]
    let n = r.nrows();
    for j in 0..n {
        let (rk, rk1) = (r[(k, j)], r[(k + 1, j)]);
        r[(k, j)] = x.conj() * rk + y.conj() * rk1;
        r[(k + 1, j)] = -y * rk + x * rk1;
    }
    for i in 0..n {
        let (rk, rk1) = (r[(i, k)], r[(i, k + 1)]);
        r[(i, k)] = rk * x + rk1 * y;
        r[(i, k + 1)] = -rk * y.conj() + rk1 * x.conj();
        let (uk, uk1) = (unitary[(i, k)], unitary[(i, k + 1)]);
        unitary[(i, k)] = uk * x + uk1 * y;
        unitary[(i, k + 1)] = -uk * y.conj() + uk1 * x.conj();
    }
    r[(k + 1, k)] = C64::new(0.0, 0.0);
    r[(k, k)] = c;
    r[(k + 1, k + 1)] = a;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{lower_defect, op_norm, unitarity_defect};

    fn by_real(a: &C64, b: &C64) -> Ordering {
        a.re.total_cmp(&b.re)
    }

    #[test]
    fn already_ordered_triangular_is_untouched() {
        let t = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap();
        let s = ordered_schur(&t, by_real).unwrap();
        assert!(op_norm(&(&s.triangular - t.as_matrix())) < 1e-14);
        assert!(unitarity_defect(&s.unitary) < 1e-14);
        assert!(op_norm(&(s.unitary.clone() - CMat::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn descending_key_swaps_the_pair() {
        let t = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap();
        let s = ordered_schur(&t, |a, b| b.re.total_cmp(&a.re)).unwrap();
        assert_eq!(s.eigenvalues(), vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(unitarity_defect(&s.unitary) <= 1e-12);
        let rebuilt = &s.unitary * &s.triangular * s.unitary.adjoint();
        assert!(op_norm(&(rebuilt - t.as_matrix())) < 1e-14);
        // Reference swap: the leading Schur vector is the eigenvector (1, 1)/sqrt 2.
        let v = s.unitary.column(0);
        assert!(((v[0] * v[0].conj()).re - 0.5).abs() < 1e-14);
        assert!((v[0] - v[1]).norm() < 1e-14);
        assert_eq!(s.perm, vec![1, 0]);
    }

    #[test]
    fn normal_input_gives_diagonal_factor() {
        let d = ComplexMatrix::diagonal(&[C64::new(0.0, 1.0), C64::new(-2.0, 0.0), C64::new(3.0, 0.5)])
            .unwrap();
        let s = ordered_schur(&d, by_real).unwrap();
        let mut off = s.triangular.clone();
        for i in 0..3 {
            off[(i, i)] = C64::new(0.0, 0.0);
        }
        assert!(op_norm(&off) <= 1e-10 * d.op_norm());
        assert!(lower_defect(&s.triangular) == 0.0);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        let d = ComplexMatrix::diagonal(&[C64::new(1.0, 2.0), C64::new(1.0, -1.0), C64::new(0.0, 5.0)])
            .unwrap();
        let s = ordered_schur(&d, by_real).unwrap();
        assert_eq!(
            s.eigenvalues(),
            vec![C64::new(0.0, 5.0), C64::new(1.0, -1.0), C64::new(1.0, 2.0)]
        );
    }

    #[test]
    fn equal_ranks_never_exchange() {
        let t = ComplexMatrix::from_real_rows(&[&[3.0, 1.0, 0.5], &[0.0, 1.0, 2.0], &[0.0, 0.0, 2.0]])
            .unwrap();
        let (mut u, mut r) = linalg::schur(t.as_matrix()).unwrap();
        let perm = reorder(&mut u, &mut r, &[1, 0, 1]);
        assert_eq!(perm, vec![1, 0, 2]);
    }
}
