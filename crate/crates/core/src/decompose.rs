//! `T = N + Q` with `N` the expectation of `T` onto the algebra generated by
//! the curve-ordered nest and `Q` strictly upper triangular in the nest
//! basis, plus the convergence diagnostics of the dyadic approximations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brown::brown_measure_exact;
use crate::curve::HilbertCurveMap;
use crate::det::{fk_gram_shift, fk_matrix, regularized_log_det_matrix};
use crate::error::{Error, Result};
use crate::expectation::{expectation_dyadic, expectation_full, pinch_commutant, pinch_full};
use crate::hs::{build_nest, ClusterInfo};
use crate::linalg::{self, lower_with_diagonal_frobenius, multiset_distance, op_norm, triangular_spectrum};
use crate::matrix::{CMat, ComplexMatrix, C64};
use crate::nest::ProjectionNest;

pub const SCHEMA_VERSION: u32 = 1;

/// A named scalar check: `value` compared against `bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Diagnostic {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Diagnostic {
            name: name.to_string(),
            value,
            bound,
            pass: value <= bound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecompositionResult {
    #[serde(rename = "N")]
    pub normal: ComplexMatrix,
    #[serde(rename = "Q")]
    pub nilpotent: ComplexMatrix,
    pub nest: ProjectionNest,
    /// Eigenvalue clusters in curve order.
    pub ordering: Vec<ClusterInfo>,
    pub curve: HilbertCurveMap,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

pub(crate) fn versioned_json<T: Serialize>(body: &T) -> String {
    serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
    .expect("report types serialize")
}

impl DecompositionResult {
    pub fn passed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.pass)
    }

    pub fn diagnostic(&self, name: &str) -> Option<&Diagnostic> {
        self.diagnostics.iter().find(|d| d.name == name)
    }

    pub fn to_json(&self) -> String {
        versioned_json(self)
    }

    /// Spectrum of `Q` read in the nest basis, where it is triangular.
    pub fn nilpotent_spectrum(&self) -> Vec<C64> {
        triangular_spectrum(self.nilpotent.as_matrix(), self.nest.basis()).0
    }
}

/// Bounds used by the decomposition diagnostics; `reconstruction`,
/// `nilpotent_lower` and `nilpotent_radius` are relative to `|T|`,
/// `normality` to `|N|^2`, `spectrum` is absolute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct DecompositionTolerances {
    pub reconstruction: f64,
    pub normality: f64,
    pub spectrum: f64,
    pub nilpotent_lower: f64,
    pub nilpotent_radius: f64,
}

impl Default for DecompositionTolerances {
    fn default() -> Self {
        DecompositionTolerances {
            reconstruction: 1e-12,
            normality: 1e-10,
            spectrum: 1e-8,
            nilpotent_lower: 1e-8,
            nilpotent_radius: 1e-8,
        }
    }
}

/// Builds the curve-ordered nest, sets `N` to the full expectation of `T`
/// and `Q = T - N`, and records the defining properties as diagnostics.
pub fn decompose(t: &ComplexMatrix, map: &HilbertCurveMap) -> Result<DecompositionResult> {
    decompose_with(t, map, &DecompositionTolerances::default())
}

pub fn decompose_with(
    t: &ComplexMatrix,
    map: &HilbertCurveMap,
    tol: &DecompositionTolerances,
) -> Result<DecompositionResult> {
    let build = build_nest(t, map)?;
    let nest = build.nest;
    let n_mat = expectation_full(t, &nest)?;
    let q_mat = t.as_matrix() - &n_mat;

    let norm = t.op_norm();
    let scale = norm.max(f64::MIN_POSITIVE);
    let mut diagnostics = Vec::new();

    let rebuilt = &n_mat + &q_mat - t.as_matrix();
    diagnostics.push(Diagnostic::at_most("reconstruction", op_norm(&rebuilt), tol.reconstruction * norm));

    let n_norm = op_norm(&n_mat);
    let commutator = &n_mat * n_mat.adjoint() - n_mat.adjoint() * &n_mat;
    diagnostics.push(Diagnostic::at_most("normality", op_norm(&commutator), tol.normality * n_norm * n_norm));

    let spec_t = linalg::eigenvalues(t.as_matrix())?;
    let spec_n = linalg::eigenvalues(&n_mat)?;
    let spectrum_gap = multiset_distance(&spec_t, &spec_n).unwrap_or(f64::INFINITY);
    diagnostics.push(Diagnostic::at_most("spectrum-match", spectrum_gap, tol.spectrum));

    let q_frame = nest.basis().adjoint() * &q_mat * nest.basis();
    diagnostics.push(Diagnostic::at_most(
        "nilpotent-lower",
        lower_with_diagonal_frobenius(&q_frame),
        tol.nilpotent_lower * scale,
    ));
    let q_radius = (0..q_frame.nrows())
        .map(|i| q_frame[(i, i)].norm())
        .fold(0.0, f64::max);
    diagnostics.push(Diagnostic::at_most("nilpotent-radius", q_radius, tol.nilpotent_radius * scale));

    Ok(DecompositionResult {
        normal: ComplexMatrix::new(n_mat)?,
        nilpotent: ComplexMatrix::new(q_mat)?,
        nest,
        ordering: build.clusters,
        curve: build.map,
        diagnostics,
    })
}

/// Parameters of [`convergence_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceParams {
    pub levels: Vec<u32>,
    pub epsilons: Vec<f64>,
    pub masses: Vec<u32>,
    pub points: Vec<C64>,
}

impl ConvergenceParams {
    /// Levels `0..=n_max` with `eps in {1, 0.1, 0.01}`, `m in {1, 10, 100}`
    /// and `lambda in {0, 1 + i, rho(T)}`.
    pub fn defaults(t: &ComplexMatrix, n_max: u32) -> Result<Self> {
        let radius = linalg::spectral_radius(t.as_matrix())?;
        Ok(ConvergenceParams {
            levels: (0..=n_max).collect(),
            epsilons: vec![1.0, 0.1, 0.01],
            masses: vec![1, 10, 100],
            points: vec![C64::new(0.0, 0.0), C64::new(1.0, 1.0), C64::new(radius, 0.0)],
        })
    }
}

/// One line of a diagnostic report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub check: &'static str,
    pub n: Option<u32>,
    pub params: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Rows in fixed order: per level, the norm gap, then the log-determinant
/// gaps per `(lambda, eps)`, then the pinched determinants per `m`, then the
/// residual spectral radius; finally the full-pinching determinant identity.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub curve: HilbertCurveMap,
    pub rows: Vec<ReportRow>,
}

/// Shortest round-trip representation, with `inf`/`nan` spelled out.
pub(crate) fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn rows_for(&self, check: &str) -> impl Iterator<Item = &ReportRow> {
        let check = check.to_string();
        self.rows.iter().filter(move |r| r.check == check)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,n,params,value,bound,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.check,
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                r.params,
                format_f64(r.value),
                format_f64(r.bound),
                r.pass
            ));
        }
        out
    }
}

fn point_label(z: C64) -> String {
    format!("lambda={}{:+}i", format_f64(z.re), z.im)
}

/// Dyadic convergence diagnostics. Failures are recorded in the rows rather
/// than returned as errors.
pub fn convergence_report(
    t: &ComplexMatrix,
    map: &HilbertCurveMap,
    params: &ConvergenceParams,
) -> Result<ConvergenceReport> {
    let cap = 2 * map.level();
    if let Some(&bad) = params.levels.iter().find(|&&n| n > cap) {
        return Err(Error::param("n", format!("level {bad} exceeds twice the curve level ({cap})")));
    }
    if let Some(&bad) = params.epsilons.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::param("eps", format!("must be positive, got {bad}")));
    }
    if params.masses.contains(&0) {
        return Err(Error::param("m", "must be at least 1"));
    }
    let build = build_nest(t, map)?;
    let curve = build.map;
    let nest = build.nest;
    let full = expectation_full(t, &nest)?;
    let nu = brown_measure_exact(t)?;

    let per_level: Vec<Result<Vec<ReportRow>>> = params
        .levels
        .par_iter()
        .map(|&n| level_rows(t, &nest, &curve, &full, &nu, params, n))
        .collect();
    let mut rows = Vec::new();
    for chunk in per_level {
        rows.extend(chunk?);
    }

    // The pinched determinants must not increase as the partition refines.
    for &m in &params.masses {
        let label = format!("m={m}");
        let mut previous: Option<f64> = None;
        for row in rows.iter_mut().filter(|r| r.check == "pinch-det" && r.params == label) {
            if let Some(prev) = previous {
                row.bound = prev + 1e-10 * prev.max(1.0);
                row.pass = row.value <= row.bound;
            }
            previous = Some(row.value);
        }
    }

    let det_t = fk_matrix(t.as_matrix());
    let det_pinch = fk_matrix(&pinch_full(t, &nest)?);
    rows.push(ReportRow {
        check: "pinch-det-identity",
        n: None,
        params: String::new(),
        value: (det_t - det_pinch).abs(),
        bound: 1e-8 * det_t.max(1.0),
        pass: (det_t - det_pinch).abs() <= 1e-8 * det_t.max(1.0),
    });

    Ok(ConvergenceReport { curve, rows })
}

fn level_rows(
    t: &ComplexMatrix,
    nest: &ProjectionNest,
    curve: &HilbertCurveMap,
    full: &CMat,
    nu: &crate::brown::SpectralMeasure,
    params: &ConvergenceParams,
    n: u32,
) -> Result<Vec<ReportRow>> {
    let omega = curve.modulus(2f64.powi(-(n as i32)));
    let approx = expectation_dyadic(t, nest, n)?;
    let mut rows = Vec::new();

    let gap = op_norm(&(&approx - full));
    rows.push(ReportRow {
        check: "expectation-gap",
        n: Some(n),
        params: String::new(),
        value: gap,
        bound: omega,
        pass: gap <= omega,
    });

    for &lambda in &params.points {
        for &eps in &params.epsilons {
            let lhs = regularized_log_det_matrix(&approx, lambda, eps);
            let rhs = nu.regularized_potential(lambda, eps);
            let bound = omega / eps.sqrt();
            rows.push(ReportRow {
                check: "logdet-gap",
                n: Some(n),
                params: format!("{};eps={}", point_label(lambda), format_f64(eps)),
                value: (lhs - rhs).abs(),
                bound,
                pass: (lhs - rhs).abs() <= bound,
            });
        }
    }

    let pinched = pinch_commutant(t, nest, n)?;
    for &m in &params.masses {
        rows.push(ReportRow {
            check: "pinch-det",
            n: Some(n),
            params: format!("m={m}"),
            value: fk_gram_shift(&pinched, 1.0 / m as f64),
            bound: f64::INFINITY,
            pass: true,
        });
    }

    let residual = t.as_matrix() - &approx;
    let (spectrum, _) = triangular_spectrum(&residual, nest.basis());
    let radius = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    rows.push(ReportRow {
        check: "residual-radius",
        n: Some(n),
        params: String::new(),
        value: radius,
        bound: omega,
        pass: radius <= omega,
    });
    Ok(rows)
}
