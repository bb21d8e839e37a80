//! Increasing families of orthogonal projections stored as a flag.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{leading_projection, op_norm, unitarity_defect};
use crate::matrix::{CMat, ComplexMatrix};

const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub t: f64,
    pub rank: usize,
}

/// `q_t` is the projection onto the first `rank(t)` columns of `basis`, where
/// `rank(t)` is the rank of the last jump with time `<= t`. The nest is
/// therefore increasing and right-continuous in `t`.
///
/// The jump list starts with `(0, 0)` and ends with rank `n`; times and ranks
/// are strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NestJson", into = "NestJson")]
pub struct ProjectionNest {
    basis: CMat,
    jumps: Vec<Jump>,
}

#[derive(Serialize, Deserialize)]
struct NestJson {
    basis: ComplexMatrix,
    jumps: Vec<Jump>,
}

impl TryFrom<NestJson> for ProjectionNest {
    type Error = Error;
    fn try_from(json: NestJson) -> Result<Self> {
        ProjectionNest::new(json.basis.into_inner(), json.jumps)
    }
}

impl From<ProjectionNest> for NestJson {
    fn from(nest: ProjectionNest) -> Self {
        NestJson {
            basis: ComplexMatrix::new(nest.basis).expect("nest basis is a valid matrix"),
            jumps: nest.jumps,
        }
    }
}

impl ProjectionNest {
    pub fn new(basis: CMat, jumps: Vec<Jump>) -> Result<Self> {
        let n = basis.nrows();
        if basis.ncols() != n || n == 0 {
            return Err(Error::InvalidNest("basis must be a non-empty square matrix".into()));
        }
        let defect = unitarity_defect(&basis);
        if !(defect <= UNITARITY_TOL) {
            return Err(Error::InvalidNest(format!("basis is not unitary (defect {defect:e})")));
        }
        match jumps.first() {
            Some(j) if j.t == 0.0 && j.rank == 0 => {}
            _ => return Err(Error::InvalidNest("first jump must be (t = 0, rank 0)".into())),
        }
        if jumps.last().map(|j| j.rank) != Some(n) {
            return Err(Error::InvalidNest(format!("last jump must reach rank {n}")));
        }
        for pair in jumps.windows(2) {
            if !(pair[1].t > pair[0].t) || pair[1].rank <= pair[0].rank {
                return Err(Error::InvalidNest(format!(
                    "jumps must strictly increase: ({}, {}) then ({}, {})",
                    pair[0].t, pair[0].rank, pair[1].t, pair[1].rank
                )));
            }
        }
        if jumps.last().map(|j| j.t > 1.0).unwrap_or(false) {
            return Err(Error::InvalidNest("jump times must lie in [0, 1]".into()));
        }
        Ok(ProjectionNest { basis, jumps })
    }

    /// Nest with one rank-one jump per basis vector at `t = k/n`.
    pub fn uniform(basis: CMat) -> Result<Self> {
        let n = basis.nrows();
        let jumps = (0..=n)
            .map(|k| Jump {
                t: k as f64 / n as f64,
                rank: k,
            })
            .collect();
        Self::new(basis, jumps)
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn rank_at(&self, t: f64) -> usize {
        self.jumps
            .iter()
            .take_while(|j| j.t <= t)
            .last()
            .map(|j| j.rank)
            .unwrap_or(0)
    }

    /// `tau(q_t) = rank(t) / n`.
    pub fn trace_at(&self, t: f64) -> f64 {
        self.rank_at(t) as f64 / self.dim() as f64
    }

    pub fn projection(&self, t: f64) -> CMat {
        leading_projection(&self.basis, self.rank_at(t))
    }

    /// Index ranges of the minimal increments `q_{t_j} - q_{t_{j-1}}`.
    pub fn increments(&self) -> Vec<Range<usize>> {
        self.jumps.windows(2).map(|w| w[0].rank..w[1].rank).collect()
    }

    /// Index ranges of the non-zero dyadic differences
    /// `f_k = q_{(k+1)/2^n} - q_{k/2^n}`, in increasing `k`.
    ///
    /// A jump at time `t > 0` lands in block `k = ceil(t 2^n) - 1`, i.e. the
    /// block with `k/2^n < t <= (k+1)/2^n`.
    pub fn dyadic_blocks(&self, level: u32) -> Vec<Range<usize>> {
        self.dyadic_blocks_with_index(level)
            .into_iter()
            .map(|(_, r)| r)
            .collect()
    }

    pub(crate) fn dyadic_blocks_with_index(&self, level: u32) -> Vec<(f64, Range<usize>)> {
        let scale = 2f64.powi(level as i32);
        let mut blocks: Vec<(f64, Range<usize>)> = Vec::new();
        for pair in self.jumps.windows(2) {
            let k = ((pair[1].t * scale).ceil() - 1.0).max(0.0);
            match blocks.last_mut() {
                Some((last_k, range)) if *last_k == k => range.end = pair[1].rank,
                _ => blocks.push((k, pair[0].rank..pair[1].rank)),
            }
        }
        blocks
    }

    /// Largest `|(1 - q) T q|` over the jump projections `q`, computed in the
    /// nest basis as the norm of the block below each jump rank.
    pub fn invariance_defect(&self, t: &CMat) -> f64 {
        let w = self.basis.adjoint() * t * &self.basis;
        let n = self.dim();
        self.jumps
            .iter()
            .filter(|j| j.rank > 0 && j.rank < n)
            .map(|j| op_norm(&w.view((j.rank, 0), (n - j.rank, j.rank)).into_owned()))
            .fold(0.0, f64::max)
    }

    /// Checks `T q_t = q_t T q_t` within `tol * |T|` at every jump.
    pub fn validate_for(&self, t: &ComplexMatrix, tol: f64) -> Result<()> {
        if t.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.dim(),
            });
        }
        let defect = self.invariance_defect(t.as_matrix());
        let tolerance = tol * t.op_norm();
        if defect > tolerance {
            return Err(Error::InvalidNest(format!(
                "nest is not invariant: defect {defect:e} exceeds {tolerance:e}"
            )));
        }
        Ok(())
    }
}
