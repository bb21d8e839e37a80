//! Invariant projections carrying a prescribed part of the spectrum, the
//! power-limit operator `((T*)^n T^n)^{1/2n}`, and the curve-ordered
//! projection nest built from them.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curve::{HilbertCurveMap, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::jacobi::one_sided_jacobi;
use crate::linalg::{self, cluster_values, lex_cmp, leading_projection, CLUSTER_TOL};
use crate::matrix::{CMat, ComplexMatrix, C64};
use crate::nest::{Jump, ProjectionNest};
use crate::schur::reorder;

/// Borel sets used to select parts of the spectrum.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum BorelSetSpec {
    /// Closed ball `{ |z - center| <= radius }`.
    Ball { center: [f64; 2], radius: f64 },
    /// `rho([0, t])`: points whose first hit time under `map` is at most `t`.
    CurveSegment { t: f64, map: HilbertCurveMap },
    #[serde(skip)]
    Predicate(Arc<dyn Fn(C64) -> bool + Send + Sync>),
}

impl fmt::Debug for BorelSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BorelSetSpec::Ball { center, radius } => f
                .debug_struct("Ball")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            BorelSetSpec::CurveSegment { t, map } => {
                f.debug_struct("CurveSegment").field("t", t).field("map", map).finish()
            }
            BorelSetSpec::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

impl BorelSetSpec {
    pub fn ball(center: C64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::param("radius", format!("must be nonnegative, got {radius}")));
        }
        Ok(BorelSetSpec::Ball {
            center: [center.re, center.im],
            radius,
        })
    }

    pub fn curve_segment(map: HilbertCurveMap, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::param("t", format!("must lie in [0, 1], got {t}")));
        }
        Ok(BorelSetSpec::CurveSegment { t, map })
    }

    pub fn predicate(f: impl Fn(C64) -> bool + Send + Sync + 'static) -> Self {
        BorelSetSpec::Predicate(Arc::new(f))
    }

    pub fn contains(&self, z: C64) -> Result<bool> {
        Ok(match self {
            BorelSetSpec::Ball { center, radius } => (z - C64::new(center[0], center[1])).norm() <= *radius,
            BorelSetSpec::CurveSegment { t, map } => map.first_hit_time(z)? <= *t,
            BorelSetSpec::Predicate(f) => f(z),
        })
    }
}

/// Invariant projection for a Borel set together with the ordered Schur
/// frame it was read from: the leading `rank` columns of `basis` span
/// `range(p)` and `triangular = basis* T basis`.
#[derive(Clone, Debug)]
pub struct HsProjection {
    pub projection: CMat,
    pub rank: usize,
    pub basis: CMat,
    pub triangular: CMat,
}

impl HsProjection {
    pub fn trace(&self) -> f64 {
        self.rank as f64 / self.basis.nrows() as f64
    }

    /// Eigenvalues of `pTp` on `range(p)`.
    pub fn inner_spectrum(&self) -> Vec<C64> {
        (0..self.rank).map(|i| self.triangular[(i, i)]).collect()
    }

    /// Eigenvalues of `(1-p)T` on `range(1-p)`.
    pub fn outer_spectrum(&self) -> Vec<C64> {
        (self.rank..self.triangular.nrows())
            .map(|i| self.triangular[(i, i)])
            .collect()
    }
}

/// Projection onto the `T`-invariant subspace spanned by the leading Schur
/// vectors once the eigenvalues inside `set` are moved to the front.
pub fn hs_projection(t: &ComplexMatrix, set: &BorelSetSpec) -> Result<HsProjection> {
    let (mut basis, mut triangular) = linalg::schur(t.as_matrix())?;
    let n = t.dim();
    let mut rank = vec![1usize; n];
    let mut inside = 0;
    for (i, r) in rank.iter_mut().enumerate() {
        if set.contains(triangular[(i, i)])? {
            *r = 0;
            inside += 1;
        }
    }
    reorder(&mut basis, &mut triangular, &rank);
    Ok(HsProjection {
        projection: leading_projection(&basis, inside),
        rank: inside,
        basis,
        triangular,
    })
}

/// `((T*)^n T^n)^{1/2n}` and its eigenvalues in decreasing order.
#[derive(Clone, Debug)]
pub struct PowerLimit {
    pub operator: CMat,
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors matching `eigenvalues`.
    pub eigenvectors: CMat,
}

impl PowerLimit {
    /// Rank of the spectral projection of the operator on `[0, r]`.
    pub fn spectral_rank_below(&self, r: f64) -> usize {
        self.eigenvalues.iter().filter(|&&v| v <= r).count()
    }
}

/// Computes `((T*)^n T^n)^{1/2n}`.
///
/// `T` is scaled to unit norm and `T^n` is carried as `Q_n R_n ... R_1` by
/// repeated QR steps, so the triangular product keeps each row at its own
/// scale. The singular values of that product come from the one-sided
/// Jacobi SVD of its adjoint, which preserves relative accuracy across the
/// grading; they are then raised to `1/n` and the scale restored.
pub fn power_limit_operator(t: &ComplexMatrix, n: usize) -> Result<PowerLimit> {
    if n == 0 {
        return Err(Error::param("n", "power must be at least 1"));
    }
    let dim = t.dim();
    let norm = t.op_norm();
    if norm == 0.0 {
        return Ok(PowerLimit {
            operator: CMat::zeros(dim, dim),
            eigenvalues: vec![0.0; dim],
            eigenvectors: CMat::identity(dim, dim),
        });
    }
    let x = linalg::scale(t.as_matrix(), C64::new(1.0 / norm, 0.0));
    let mut q = CMat::identity(dim, dim);
    let mut product = CMat::identity(dim, dim);
    for step in 1..=n {
        let qr = (&x * &q).qr();
        let (q_next, r) = qr.unpack();
        product = r * product;
        q = q_next;
        let worst = product.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !worst.is_finite() {
            return Err(Error::RangeGuard {
                power: step,
                log10_scale: f64::INFINITY,
            });
        }
        // Rows falling into the subnormal range lose relative accuracy.
        for i in 0..dim {
            let row_max = product.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if row_max != 0.0 && row_max < 1e-290 {
                return Err(Error::RangeGuard {
                    power: step,
                    log10_scale: row_max.log10() + step as f64 * norm.log10(),
                });
            }
        }
    }
    // T^n = Q P, so the right singular vectors of T^n are those of P. With
    // G = P* = U S J*, P = J S U* and the right singular vectors are U.
    let svd = one_sided_jacobi(&product.adjoint());
    let inv = 1.0 / n as f64;
    let eigenvalues: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s > 0.0 { norm * (s.ln() * inv).exp() } else { 0.0 })
        .collect();
    let mut eigenvectors = svd.left.clone();
    complete_orthonormal(&mut eigenvectors, &svd.singular_values);
    let mut operator = CMat::zeros(dim, dim);
    for (k, &value) in eigenvalues.iter().enumerate() {
        if value > 0.0 {
            let v = eigenvectors.column(k);
            operator += v * v.adjoint() * C64::new(value, 0.0);
        }
    }
    Ok(PowerLimit {
        operator,
        eigenvalues,
        eigenvectors,
    })
}

/// Fills the columns that belong to zero singular values with an orthonormal
/// basis of the orthogonal complement of the others.
fn complete_orthonormal(vectors: &mut CMat, sigma: &[f64]) {
    let dim = vectors.nrows();
    let mut candidate = 0;
    for k in 0..sigma.len() {
        if sigma[k] > 0.0 {
            continue;
        }
        loop {
            let mut v = CMat::zeros(dim, 1);
            v[(candidate % dim, 0)] = C64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for j in 0..sigma.len() {
                    if j == k || (sigma[j] == 0.0 && j > k) {
                        continue;
                    }
                    let u = vectors.column(j).into_owned();
                    let coeff = u.dotc(&v.column(0));
                    v -= u * coeff;
                }
            }
            let nrm = v.norm();
            if nrm > 1e-8 || candidate > 4 * dim {
                vectors.set_column(k, &v.column(0).unscale(nrm));
                break;
            }
        }
    }
}

/// `|T^n xi|^{1/n}` for a unit vector `xi`, accumulated in the log domain.
pub fn growth_rate(t: &ComplexMatrix, xi: &CMat, n: usize) -> f64 {
    let mut v = xi.clone();
    let start = v.norm();
    if start == 0.0 || n == 0 {
        return 0.0;
    }
    v.unscale_mut(start);
    let mut log_norm = 0.0;
    for _ in 0..n {
        v = t.as_matrix() * v;
        let nrm = v.norm();
        if nrm == 0.0 {
            return 0.0;
        }
        log_norm += nrm.ln();
        v.unscale_mut(nrm);
    }
    (log_norm / n as f64).exp()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthReport {
    pub radius: f64,
    pub power: usize,
    pub invariant_rank: usize,
    /// Largest `|T^n xi|^{1/n}` over sampled unit `xi` in `range(p_{B_r})`.
    pub inside_rate: f64,
    /// `inside_rate <= 1.25 r`.
    pub inside_pass: bool,
    /// Smallest rate over sampled unit `xi` orthogonal to `range(p_{B_r})`;
    /// absent when the projection is the identity.
    pub outside_rate: Option<f64>,
    pub outside_exceeds_radius: Option<bool>,
}

/// Growth diagnostic for the invariant subspace of the ball `B_r` about 0:
/// vectors inside grow at rate at most about `r`, vectors orthogonal to it
/// faster. The basis vectors of each subspace are always included among the
/// samples.
pub fn growth_subspace_check(
    t: &ComplexMatrix,
    r: f64,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<GrowthReport> {
    if !(r > 0.0) {
        return Err(Error::param("r", format!("must be positive, got {r}")));
    }
    let hs = hs_projection(t, &BorelSetSpec::ball(C64::new(0.0, 0.0), r)?)?;
    let dim = t.dim();
    let k = hs.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rates = |cols: std::ops::Range<usize>| -> Vec<f64> {
        let width = cols.len();
        let frame = hs.basis.columns(cols.start, width).into_owned();
        let mut out = Vec::new();
        for j in 0..width {
            out.push(growth_rate(t, &frame.columns(j, 1).into_owned(), n_max));
        }
        for _ in 0..samples {
            let coeffs = CMat::from_fn(width, 1, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            out.push(growth_rate(t, &(&frame * coeffs), n_max));
        }
        out
    };
    let inside_rate = if k > 0 {
        rates(0..k).into_iter().fold(0.0, f64::max)
    } else {
        0.0
    };
    let outside_rate = (k < dim).then(|| rates(k..dim).into_iter().fold(f64::INFINITY, f64::min));
    Ok(GrowthReport {
        radius: r,
        power: n_max,
        invariant_rank: k,
        inside_rate,
        inside_pass: inside_rate <= 1.25 * r,
        outside_rate,
        outside_exceeds_radius: outside_rate.map(|rate| rate > r),
    })
}

/// One group of (numerically) repeated eigenvalues and its place on the curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterInfo {
    pub center: [f64; 2],
    pub multiplicity: usize,
    pub hit_time: f64,
    /// Curve level at which this cluster's cell first differs from every
    /// other cluster's cell (the map's own level when no refinement was needed).
    pub resolved_level: u32,
}

impl ClusterInfo {
    pub fn location(&self) -> C64 {
        C64::new(self.center[0], self.center[1])
    }
}

#[derive(Clone, Debug)]
pub struct NestBuild {
    pub nest: ProjectionNest,
    /// Clusters in nest order.
    pub clusters: Vec<ClusterInfo>,
    /// `basis* T basis`, upper triangular.
    pub triangular: CMat,
    /// The map actually used, after any re-anchoring.
    pub map: HilbertCurveMap,
}

/// The nest `q_t = p_{rho([0,t])}` for the curve `map`.
///
/// Eigenvalues within `1e-10 |T|` are clustered; clusters are ordered by the
/// curve index of their cell, refining past the map level (up to level 32)
/// when two clusters share a cell, and finally by `(Re, Im)`. The Schur
/// diagonal is reordered by cluster without exchanging members of one
/// cluster, and `q_t` jumps by the cluster multiplicity at its hit time.
/// When a cluster occupies the curve's first cell the curve is rotated to
/// start from the next corner.
pub fn build_nest(t: &ComplexMatrix, map: &HilbertCurveMap) -> Result<NestBuild> {
    let (mut basis, mut triangular) = linalg::schur(t.as_matrix())?;
    let n = t.dim();
    let eigenvalues: Vec<C64> = (0..n).map(|i| triangular[(i, i)]).collect();
    for z in &eigenvalues {
        if !(z.re.abs() <= map.half_side() && z.im.abs() <= map.half_side()) {
            return Err(Error::OutsideSquare {
                re: z.re,
                im: z.im,
                half_side: map.half_side(),
            });
        }
    }
    let groups = cluster_values(&eigenvalues, CLUSTER_TOL * t.op_norm());
    let centers: Vec<C64> = groups
        .iter()
        .map(|g| g.iter().map(|&i| eigenvalues[i]).sum::<C64>() / g.len() as f64)
        .collect();

    let mut chosen = None;
    for turn in 0..4u8 {
        let candidate = map.with_anchor(map.anchor() + turn);
        let base: Vec<u64> = centers
            .iter()
            .map(|&z| candidate.cell_index(z))
            .collect::<Result<_>>()?;
        if base.iter().all(|&d| d > 0) {
            chosen = Some(candidate);
            break;
        }
    }
    let map = chosen.ok_or(Error::AnchorExhausted)?;

    let fine: Vec<u64> = centers
        .iter()
        .map(|&z| map.cell_index_at(z, MAX_LEVEL))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        fine[a]
            .cmp(&fine[b])
            .then_with(|| lex_cmp(&centers[a], &centers[b]))
            .then(a.cmp(&b))
    });

    let mut clusters = Vec::with_capacity(groups.len());
    let mut last_time = 0.0f64;
    for &g in &order {
        let level = resolving_level(map.level(), &fine, g);
        let shift = 2 * (MAX_LEVEL - level);
        let index = if shift >= 64 { 0 } else { fine[g] >> shift };
        let mut hit_time = index as f64 / 4f64.powi(level as i32);
        if hit_time <= last_time {
            hit_time = next_after(last_time);
        }
        last_time = hit_time;
        clusters.push(ClusterInfo {
            center: [centers[g].re, centers[g].im],
            multiplicity: groups[g].len(),
            hit_time,
            resolved_level: level,
        });
    }

    let mut rank = vec![0usize; n];
    for (pos, &g) in order.iter().enumerate() {
        for &i in &groups[g] {
            rank[i] = pos;
        }
    }
    reorder(&mut basis, &mut triangular, &rank);

    let mut jumps = vec![Jump { t: 0.0, rank: 0 }];
    let mut cumulative = 0;
    for c in &clusters {
        cumulative += c.multiplicity;
        jumps.push(Jump {
            t: c.hit_time,
            rank: cumulative,
        });
    }
    let nest = ProjectionNest::new(basis, jumps)?;
    Ok(NestBuild {
        nest,
        clusters,
        triangular,
        map,
    })
}

/// Smallest level `>= base` at which cluster `g`'s cell differs from every
/// other cluster's cell, capped at the finest level.
fn resolving_level(base: u32, fine: &[u64], g: usize) -> u32 {
    let mut level = base;
    while level < MAX_LEVEL {
        let shift = 2 * (MAX_LEVEL - level);
        let mine = fine[g] >> shift;
        if fine
            .iter()
            .enumerate()
            .all(|(h, &d)| h == g || (d >> shift) != mine)
        {
            return level;
        }
        level += 1;
    }
    MAX_LEVEL
}

fn next_after(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

/// `key` for [`crate::schur::ordered_schur`] sorting eigenvalues by curve
/// hit time.
pub fn hit_time_order(map: HilbertCurveMap) -> impl Fn(&C64, &C64) -> Ordering {
    move |a, b| {
        let da = map.cell_index_at(*a, MAX_LEVEL).unwrap_or(u64::MAX);
        let db = map.cell_index_at(*b, MAX_LEVEL).unwrap_or(u64::MAX);
        da.cmp(&db)
    }
}
