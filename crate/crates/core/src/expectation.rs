//! Conditional expectations attached to a projection nest: block averaging
//! onto the abelian algebra generated by the nest (dyadic or full) and the
//! block-diagonal pinching onto its relative commutant.

use std::ops::Range;

use crate::error::Result;
use crate::matrix::{CMat, ComplexMatrix, C64};
use crate::nest::ProjectionNest;

/// Invariance tolerance, relative to `|T|`, demanded of a nest before any
/// expectation is taken.
pub const NEST_TOL: f64 = 1e-9;

/// One non-zero block `f` of a partition of the nest together with the
/// coefficient `tau(f T f) / tau(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockAverage {
    /// Dyadic index `k` (or the jump index for the full expectation).
    pub index: u64,
    pub columns: Range<usize>,
    pub coefficient: C64,
}

fn compressed(t: &ComplexMatrix, nest: &ProjectionNest) -> Result<CMat> {
    nest.validate_for(t, NEST_TOL)?;
    Ok(nest.basis().adjoint() * t.as_matrix() * nest.basis())
}

fn averages(w: &CMat, blocks: impl IntoIterator<Item = (u64, Range<usize>)>) -> Vec<BlockAverage> {
    blocks
        .into_iter()
        .filter(|(_, r)| !r.is_empty())
        .map(|(index, columns)| {
            let sum: C64 = columns.clone().map(|i| w[(i, i)]).sum();
            BlockAverage {
                index,
                coefficient: sum / columns.len() as f64,
                columns,
            }
        })
        .collect()
}

fn assemble(basis: &CMat, blocks: &[BlockAverage]) -> CMat {
    let n = basis.nrows();
    let mut diag = vec![C64::new(0.0, 0.0); n];
    for b in blocks {
        for i in b.columns.clone() {
            diag[i] = b.coefficient;
        }
    }
    let mut scaled = basis.clone();
    for (j, d) in diag.iter().enumerate() {
        let col = scaled.column(j) * *d;
        scaled.set_column(j, &col);
    }
    scaled * basis.adjoint()
}

/// Coefficients of `Exp_{D_n}(T)` on the non-zero blocks
/// `f_k = q_{(k+1)/2^n} - q_{k/2^n}`.
pub fn dyadic_averages(t: &ComplexMatrix, nest: &ProjectionNest, n: u32) -> Result<Vec<BlockAverage>> {
    let w = compressed(t, nest)?;
    Ok(averages(
        &w,
        nest.dyadic_blocks_with_index(n)
            .into_iter()
            .map(|(k, r)| (k as u64, r)),
    ))
}

/// `Exp_{D_n}(T) = sum_k tau(f_k T f_k) / tau(f_k) f_k` over non-zero `f_k`.
pub fn expectation_dyadic(t: &ComplexMatrix, nest: &ProjectionNest, n: u32) -> Result<CMat> {
    let blocks = dyadic_averages(t, nest, n)?;
    Ok(assemble(nest.basis(), &blocks))
}

/// Expectation onto the algebra generated by the whole nest: the same
/// averages taken over the minimal jump increments.
pub fn expectation_full(t: &ComplexMatrix, nest: &ProjectionNest) -> Result<CMat> {
    let w = compressed(t, nest)?;
    let blocks = averages(
        &w,
        nest.increments().into_iter().enumerate().map(|(j, r)| (j as u64, r)),
    );
    Ok(assemble(nest.basis(), &blocks))
}

fn pinch(t: &ComplexMatrix, nest: &ProjectionNest, blocks: Vec<Range<usize>>) -> Result<CMat> {
    let w = compressed(t, nest)?;
    let n = t.dim();
    let mut kept = CMat::zeros(n, n);
    for r in blocks {
        let len = r.len();
        kept.view_mut((r.start, r.start), (len, len))
            .copy_from(&w.view((r.start, r.start), (len, len)));
    }
    Ok(nest.basis() * kept * nest.basis().adjoint())
}

/// Pinching `sum_k f_k T f_k` over the dyadic blocks of level `n`.
pub fn pinch_commutant(t: &ComplexMatrix, nest: &ProjectionNest, n: u32) -> Result<CMat> {
    pinch(t, nest, nest.dyadic_blocks(n))
}

/// Pinching over the minimal jump increments.
pub fn pinch_full(t: &ComplexMatrix, nest: &ProjectionNest) -> Result<CMat> {
    pinch(t, nest, nest.increments())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::op_norm;
    use crate::nest::Jump;

    fn upper() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap()
    }

    fn coordinate_nest() -> ProjectionNest {
        ProjectionNest::uniform(CMat::identity(2, 2)).unwrap()
    }

    fn diag(values: &[f64]) -> CMat {
        let d: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        ComplexMatrix::diagonal(&d).unwrap().into_inner()
    }

    #[test]
    fn dyadic_levels() {
        let t = upper();
        let nest = coordinate_nest();
        let e0 = expectation_dyadic(&t, &nest, 0).unwrap();
        assert!(op_norm(&(e0 - diag(&[1.5, 1.5]))) < 1e-15);
        let e1 = expectation_dyadic(&t, &nest, 1).unwrap();
        assert!(op_norm(&(&e1 - diag(&[1.0, 2.0]))) < 1e-15);
        let full = expectation_full(&t, &nest).unwrap();
        assert!(op_norm(&(full - e1)) < 1e-15);
    }

    #[test]
    fn pinching_levels() {
        let t = upper();
        let nest = coordinate_nest();
        let p0 = pinch_commutant(&t, &nest, 0).unwrap();
        assert!(op_norm(&(p0 - t.as_matrix())) < 1e-15);
        let p1 = pinch_commutant(&t, &nest, 1).unwrap();
        assert!(op_norm(&(&p1 - diag(&[1.0, 2.0]))) < 1e-15);
        let again = pinch_commutant(&ComplexMatrix::new(p1.clone()).unwrap(), &nest, 1).unwrap();
        assert_eq!(again, p1);
    }

    #[test]
    fn single_cluster_averages_to_trace() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let nest = ProjectionNest::new(
            CMat::identity(2, 2),
            vec![Jump { t: 0.0, rank: 0 }, Jump { t: 0.5, rank: 2 }],
        )
        .unwrap();
        assert_eq!(op_norm(&expectation_full(&j, &nest).unwrap()), 0.0);
    }

    #[test]
    fn rejects_non_invariant_nest() {
        let lower = upper().adjoint();
        assert!(matches!(
            expectation_full(&lower, &coordinate_nest()),
            Err(Error::InvalidNest(_))
        ));
    }
}
