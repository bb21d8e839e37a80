//! The verification battery behind `verify --suite full`.
//!
//! Every criterion draws its own matrices from seeds derived from the suite
//! seed, runs the checks in parallel over members and aggregates in member
//! order, so a report depends only on `(seed, config)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::brown::{brown_density_grid, GridBounds};
use crate::config::RunConfig;
use crate::curve::HilbertCurveMap;
use crate::decompose::{convergence_report, decompose_with, ConvergenceParams, Diagnostic, ReportRow};
use crate::ensemble::{gaussian, haar_unitary, member, uniform_disk, DiagonalLaw, EnsembleKind};
use crate::error::{Error, Result};
use crate::hs::{hs_projection, power_limit_operator, BorelSetSpec};
use crate::linalg::{self, op_norm};
use crate::majorization::{
    log_plus_equivalence_check, log_submajorizes, pinch_log_check, shift_lemma_check, submajorizes, weyl_check,
    CheckRow, Status,
};
use crate::matrix::{CMat, ComplexMatrix, C64};
use crate::report::{envelope_json, inputs_hash, CheckTable};

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "decomposition-soundness"),
    (2, "weyl-inequality"),
    (3, "hs-projection"),
    (4, "power-limit"),
    (5, "curve-nest-bounds"),
    (6, "determinant-convergence"),
    (7, "determinant-monotonicity"),
    (8, "brown-grid"),
    (9, "majorization-suite"),
];

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub instances: usize,
    /// Aggregated comparisons; the criterion passes when all of them do.
    pub measures: Vec<Diagnostic>,
    #[serde(skip)]
    pub checks: CheckTable,
}

impl CriterionResult {
    fn new(id: u8, instances: usize, measures: Vec<Diagnostic>, checks: CheckTable) -> Self {
        let name = CRITERIA.iter().find(|(k, _)| *k == id).map(|(_, n)| *n).unwrap_or("unknown");
        CriterionResult {
            id,
            name,
            pass: measures.iter().all(|m| m.pass),
            instances,
            measures,
            checks,
        }
    }

    pub fn measure(&self, name: &str) -> Option<&Diagnostic> {
        self.measures.iter().find(|m| m.name == name)
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let worst = self
            .measures
            .iter()
            .filter(|m| !m.pass)
            .chain(self.measures.iter())
            .next()
            .map(|m| format!("{} = {:.3e} (bound {:.3e})", m.name, m.value, m.bound))
            .unwrap_or_default();
        format!(
            "criterion {:>2} {:<26} {}  instances={} {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.instances,
            worst
        )
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn to_json(&self, config: &RunConfig) -> String {
        envelope_json("verify", config, self)
    }

    pub fn to_csv(&self) -> String {
        let mut all = CheckTable::new();
        for c in &self.criteria {
            all.append(&c.checks);
        }
        all.to_csv()
    }
}

pub fn run_suite(seed: u64, config: &RunConfig) -> Result<SuiteReport> {
    config.validate()?;
    let criteria = CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, seed, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        seed,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    })
}

pub fn run_criterion(id: u8, seed: u64, config: &RunConfig) -> Result<CriterionResult> {
    match id {
        1 => decomposition_soundness(seed, config),
        2 => weyl_inequality(seed, config),
        3 => hs_contract(seed),
        4 => power_limit_convergence(seed),
        5 => curve_and_nest_bounds(seed, config),
        6 => determinant_convergence(seed, config),
        7 => determinant_monotonicity(seed, config),
        8 => brown_grid(),
        9 => majorization_suite(seed),
        _ => Err(Error::param("criterion", format!("no criterion {id}"))),
    }
}

/// Seed for an independent sub-battery; tag 0 is the suite seed itself.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn draw(kind: &EnsembleKind, seed: u64, count: usize) -> Result<Vec<ComplexMatrix>> {
    (0..count)
        .into_par_iter()
        .map(|i| member(kind, seed, i as u64))
        .collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Largest value against `bound`; NaN counts as a failure.
fn worst(name: &str, values: impl IntoIterator<Item = f64>, bound: f64) -> Diagnostic {
    let value = values
        .into_iter()
        .map(|v| if v.is_nan() { f64::INFINITY } else { v })
        .fold(0.0, f64::max);
    Diagnostic::at_most(name, value, bound)
}

fn count_at_most(name: &str, count: usize, bound: usize) -> Diagnostic {
    Diagnostic::at_most(name, count as f64, bound as f64)
}

fn row(check: &'static str, key: String, lhs: f64, rhs: f64) -> CheckRow {
    CheckRow::new(check, key, lhs, rhs, 0.0)
}

fn flag_row(check: &'static str, key: String, ok: bool) -> CheckRow {
    CheckRow {
        check,
        key,
        lhs: if ok { 0.0 } else { 1.0 },
        rhs: 0.0,
        margin: if ok { 0.0 } else { -1.0 },
        pass: Status::from_bool(ok),
    }
}

fn report_row(r: &ReportRow) -> CheckRow {
    CheckRow::from(r)
}

fn ginibre(n: usize) -> EnsembleKind {
    EnsembleKind::Ginibre { n }
}

// Criterion 1.

fn decomposition_soundness(seed: u64, config: &RunConfig) -> Result<CriterionResult> {
    let tol = &config.tolerances;
    let mats = draw(&ginibre(16), seed, 200)?;
    let outcomes: Vec<Result<[f64; 5]>> = mats
        .par_iter()
        .map(|t| {
            let r = decompose_with(t, &config.curve_for(t)?, tol)?;
            let norm = t.op_norm();
            let nn = r.normal.op_norm();
            let get = |name: &str| r.diagnostic(name).map(|d| d.value).unwrap_or(f64::INFINITY);
            Ok([
                get("reconstruction") / norm,
                get("normality") / (nn * nn),
                get("spectrum-match"),
                get("nilpotent-lower") / norm,
                get("nilpotent-radius") / norm,
            ])
        })
        .collect();
    let names = [
        "reconstruction",
        "normality",
        "spectrum-match",
        "nilpotent-lower",
        "nilpotent-radius",
    ];
    let bounds = [
        tol.reconstruction,
        tol.normality,
        tol.spectrum,
        tol.nilpotent_lower,
        tol.nilpotent_radius,
    ];
    let mut checks = CheckTable::new();
    let mut columns = vec![Vec::new(); 5];
    let mut errors = 0;
    for (t, outcome) in mats.iter().zip(&outcomes) {
        let hash = inputs_hash(&[t]);
        match outcome {
            Ok(values) => {
                for k in 0..5 {
                    columns[k].push(values[k]);
                    checks.push(&hash, row("decomposition", names[k].to_string(), values[k], bounds[k]));
                }
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("decomposition", format!("error={}", e.kind()), false));
            }
        }
    }
    let mut measures: Vec<Diagnostic> = (0..5)
        .map(|k| worst(names[k], columns[k].iter().copied(), bounds[k]))
        .collect();
    measures.push(count_at_most("errors", errors, 0));
    Ok(CriterionResult::new(1, mats.len(), measures, checks))
}

// Criterion 2.

fn weyl_inequality(seed: u64, config: &RunConfig) -> Result<CriterionResult> {
    let gauges = config.gauges()?;
    let mut mats = draw(&ginibre(16), seed, 200)?;
    mats.extend(draw(
        &EnsembleKind::UpperTriangularRandom {
            n: 16,
            diagonal_law: DiagonalLaw::Gaussian,
        },
        sub_seed(seed, 2),
        200,
    )?);
    let reports: Vec<Result<_>> = mats
        .par_iter()
        .map(|t| weyl_check(t, &gauges, &config.curve_for(t)?))
        .collect();
    let mut checks = CheckTable::new();
    let (mut log_fail, mut ineq_fail, mut eq_fail, mut errors) = (0, 0, 0, 0);
    let mut worst_eq: Vec<f64> = Vec::new();
    for (t, report) in mats.iter().zip(reports) {
        let hash = inputs_hash(&[t]);
        match report {
            Ok(r) => {
                checks.extend(&hash, r.rows());
                log_fail += usize::from(!r.log_majorization.holds);
                ineq_fail += r.inequality.iter().filter(|x| x.pass == Status::Fail).count();
                eq_fail += r.equality.iter().filter(|x| x.pass == Status::Fail).count();
                worst_eq.extend(r.equality.iter().map(|x| -x.margin));
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("weyl", format!("error={}", e.kind()), false));
            }
        }
    }
    let measures = vec![
        count_at_most("log-majorization-failures", log_fail, 0),
        count_at_most("gauge-inequality-failures", ineq_fail, 0),
        count_at_most("gauge-equality-failures", eq_fail, 0),
        worst("gauge-equality-gap", worst_eq, 1e-9),
        count_at_most("errors", errors, 0),
    ];
    Ok(CriterionResult::new(2, mats.len(), measures, checks))
}

// Criterion 3.

struct BallOutcome {
    rank_mismatch: bool,
    invariance: f64,
    inner_excess: f64,
    outer_deficit: f64,
}

fn random_ball<R: Rng>(rng: &mut R) -> (C64, f64) {
    (uniform_disk(rng, 1.2), 0.1 + 0.9 * rng.random::<f64>())
}

fn ball_outcome(t: &ComplexMatrix, center: C64, radius: f64) -> Result<BallOutcome> {
    let hs = hs_projection(t, &BorelSetSpec::ball(center, radius)?)?;
    // Eigenvalues of the transpose come out of a separate factorization.
    let oracle = linalg::eigenvalues(&t.as_matrix().transpose())?
        .iter()
        .filter(|z| (*z - center).norm() <= radius)
        .count();
    let x = t.as_matrix();
    let p = &hs.projection;
    let invariance = op_norm(&(x * p - p * x * p)) / t.op_norm();
    let n = t.dim();
    let compress = |cols: std::ops::Range<usize>| -> Result<Vec<C64>> {
        if cols.is_empty() {
            return Ok(Vec::new());
        }
        let v = hs.basis.columns(cols.start, cols.len()).into_owned();
        linalg::eigenvalues(&(v.adjoint() * x * &v))
    };
    let inner_excess = compress(0..hs.rank)?
        .iter()
        .map(|z| (z - center).norm() - radius)
        .fold(f64::NEG_INFINITY, f64::max);
    let outer_deficit = compress(hs.rank..n)?
        .iter()
        .map(|z| radius - (z - center).norm())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BallOutcome {
        rank_mismatch: hs.rank != oracle,
        invariance,
        inner_excess,
        outer_deficit,
    })
}

fn hs_contract(seed: u64) -> Result<CriterionResult> {
    let s = sub_seed(seed, 3);
    let mats = draw(&ginibre(8), s, 200)?;
    let single: Vec<Result<(C64, f64, BallOutcome)>> = mats
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let (c, r) = random_ball(&mut rng_for(s, i as u64));
            Ok((c, r, ball_outcome(t, c, r)?))
        })
        .collect();
    let nested: Vec<Result<(usize, usize, f64)>> = mats[..100]
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = rng_for(s, 1_000_000 + i as u64);
            let (c1, r1) = random_ball(&mut rng);
            let shift = uniform_disk(&mut rng, 0.3);
            let c2 = c1 + shift;
            let r2 = r1 + shift.norm() + 0.3 * rng.random::<f64>();
            let p1 = hs_projection(t, &BorelSetSpec::ball(c1, r1)?)?;
            let p2 = hs_projection(t, &BorelSetSpec::ball(c2, r2)?)?;
            let leak = op_norm(&(&p1.projection - &p2.projection * &p1.projection));
            Ok((p1.rank, p2.rank, leak))
        })
        .collect();

    let mut checks = CheckTable::new();
    let (mut mismatches, mut errors) = (0, 0);
    let (mut inv, mut inner, mut outer) = (Vec::new(), Vec::new(), Vec::new());
    for (t, outcome) in mats.iter().zip(&single) {
        let hash = inputs_hash(&[t]);
        match outcome {
            Ok((c, r, o)) => {
                let key = format!("ball={}{:+}i,{}", c.re, c.im, r);
                mismatches += usize::from(o.rank_mismatch);
                inv.push(o.invariance);
                inner.push(o.inner_excess);
                outer.push(o.outer_deficit);
                checks.push(&hash, flag_row("hs-trace", key.clone(), !o.rank_mismatch));
                checks.push(&hash, row("hs-invariance", key.clone(), o.invariance, 1e-9));
                checks.push(&hash, row("hs-inner-spectrum", key.clone(), o.inner_excess, 1e-8));
                checks.push(&hash, row("hs-outer-spectrum", key, o.outer_deficit, 1e-8));
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("hs", format!("error={}", e.kind()), false));
            }
        }
    }
    let (mut monotone_fail, mut leaks) = (0, Vec::new());
    for (t, outcome) in mats.iter().zip(&nested) {
        let hash = inputs_hash(&[t]);
        match outcome {
            Ok((r1, r2, leak)) => {
                monotone_fail += usize::from(r1 > r2);
                leaks.push(*leak);
                checks.push(&hash, row("hs-monotone", format!("ranks={r1}<={r2}"), *leak, 1e-8));
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("hs-monotone", format!("error={}", e.kind()), false));
            }
        }
    }
    let measures = vec![
        count_at_most("trace-mismatches", mismatches, 0),
        worst("invariance", inv, 1e-9),
        worst("inner-spectrum-excess", inner, 1e-8),
        worst("outer-spectrum-deficit", outer, 1e-8),
        count_at_most("monotone-rank-failures", monotone_fail, 0),
        worst("nested-range-leak", leaks, 1e-8),
        count_at_most("errors", errors, 0),
    ];
    Ok(CriterionResult::new(3, mats.len() + nested.len(), measures, checks))
}

// Criterion 4.

const POWER: usize = 64;
const MIN_GAP: f64 = 0.1;
const DRAW_CAP: u64 = 200_000;

/// Moduli in increasing order when every consecutive relative gap exceeds 10%.
fn separated_moduli(t: &ComplexMatrix) -> Result<Option<Vec<f64>>> {
    let mut moduli: Vec<f64> = linalg::eigenvalues(t.as_matrix())?.iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let ok = moduli.windows(2).all(|w| (w[1] - w[0]) > MIN_GAP * w[1]);
    Ok(ok.then_some(moduli))
}

fn power_limit_convergence(seed: u64) -> Result<CriterionResult> {
    let s = sub_seed(seed, 4);
    let kind = ginibre(8);
    let mut accepted = Vec::new();
    let mut index = 0;
    while accepted.len() < 50 && index < DRAW_CAP {
        let t = member(&kind, s, index)?;
        if let Some(moduli) = separated_moduli(&t)? {
            accepted.push((t, moduli));
        }
        index += 1;
    }
    let outcomes: Vec<Result<(f64, usize)>> = accepted
        .par_iter()
        .map(|(t, moduli)| {
            let pl = power_limit_operator(t, POWER)?;
            let descending: Vec<f64> = moduli.iter().rev().copied().collect();
            let rel = pl
                .eigenvalues
                .iter()
                .zip(&descending)
                .map(|(a, b)| (a - b).abs() / b)
                .fold(0.0, f64::max);
            let mut rank_mismatch = 0;
            for w in moduli.windows(2) {
                let r = 0.5 * (w[0] + w[1]);
                let hs = hs_projection(t, &BorelSetSpec::ball(C64::new(0.0, 0.0), r)?)?;
                rank_mismatch += usize::from(hs.rank != pl.spectral_rank_below(r));
            }
            Ok((rel, rank_mismatch))
        })
        .collect();
    let mut checks = CheckTable::new();
    let (mut rels, mut mismatches, mut errors) = (Vec::new(), 0, 0);
    for ((t, _), outcome) in accepted.iter().zip(outcomes) {
        let hash = inputs_hash(&[t]);
        match outcome {
            Ok((rel, mm)) => {
                rels.push(rel);
                mismatches += mm;
                checks.push(&hash, row("power-limit-relative", format!("n={POWER}"), rel, 0.1));
                checks.push(&hash, flag_row("power-limit-rank", format!("mismatches={mm}"), mm == 0));
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("power-limit", format!("error={}", e.kind()), false));
            }
        }
    }
    let shortfall = 50 - accepted.len();
    let measures = vec![
        count_at_most("accepted-shortfall", shortfall, 0),
        worst("relative-error", rels, 0.1),
        count_at_most("rank-mismatches", mismatches, 0),
        count_at_most("errors", errors, 0),
    ];
    Ok(CriterionResult::new(4, accepted.len(), measures, checks))
}

// Criterion 5.

const MODULUS_PAIRS: u64 = 100_000;

/// Largest `|c(d1) - c(d2)| / omega((|d1 - d2| + 1) 4^-m)` over sampled cell
/// pairs: each cell center is a curve point of its index interval, so the
/// continuous modulus bounds that ratio by 1.
fn curve_modulus_ratio(map: &HilbertCurveMap, seed: u64) -> f64 {
    let m = map.level();
    let cells = 1u64 << (2 * m);
    let ratios: Vec<f64> = (0..MODULUS_PAIRS)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let d1 = rng.random_range(0..cells);
            let d2 = if i % 2 == 0 {
                rng.random_range(0..cells)
            } else {
                let reach = 1u64 << (2 * rng.random_range(0..=m / 2));
                let step = rng.random_range(0..reach);
                if rng.random::<bool>() {
                    d1.saturating_sub(step)
                } else {
                    (d1 + step).min(cells - 1)
                }
            };
            let dt = (d1.abs_diff(d2) + 1) as f64 / cells as f64;
            (map.cell_center(d1) - map.cell_center(d2)).norm() / map.modulus(dt)
        })
        .collect();
    ratios.into_iter().fold(0.0, f64::max)
}

fn curve_and_nest_bounds(seed: u64, config: &RunConfig) -> Result<CriterionResult> {
    let s = sub_seed(seed, 5);
    let mats = draw(&ginibre(8), s, 50)?;
    let params = ConvergenceParams {
        levels: (2..=10).collect(),
        epsilons: Vec::new(),
        masses: Vec::new(),
        points: Vec::new(),
    };
    let reports: Vec<Result<_>> = mats
        .par_iter()
        .map(|t| convergence_report(t, &config.curve_for(t)?, &params))
        .collect();
    let mut checks = CheckTable::new();
    let (mut exp_ratio, mut res_ratio, mut errors) = (Vec::new(), Vec::new(), 0);
    for (t, report) in mats.iter().zip(reports) {
        let hash = inputs_hash(&[t]);
        match report {
            Ok(r) => {
                for row in r.rows.iter().filter(|x| x.check != "pinch-det-identity") {
                    match row.check {
                        "expectation-gap" => exp_ratio.push(row.value / row.bound),
                        "residual-radius" => res_ratio.push(row.value / row.bound),
                        _ => {}
                    }
                    checks.push(&hash, report_row(row));
                }
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("nest-bounds", format!("error={}", e.kind()), false));
            }
        }
    }
    let curve = HilbertCurveMap::new(config.curve_level, 1.0)?;
    let modulus = curve_modulus_ratio(&curve, sub_seed(seed, 50));
    checks.push("curve", row("curve-modulus", format!("pairs={MODULUS_PAIRS}"), modulus, 1.0));
    let measures = vec![
        worst("expectation-gap/omega", exp_ratio, 1.0),
        worst("residual-radius/omega", res_ratio, 1.0),
        worst("curve-modulus-ratio", [modulus], 1.0),
        count_at_most("errors", errors, 0),
    ];
    Ok(CriterionResult::new(5, mats.len(), measures, checks))
}

// Criterion 6.

fn determinant_convergence(seed: u64, config: &RunConfig) -> Result<CriterionResult> {
    let s = sub_seed(seed, 6);
    let mats = draw(&ginibre(8), s, 20)?;
    let params = ConvergenceParams {
        levels: vec![12],
        epsilons: vec![0.1],
        masses: Vec::new(),
        points: vec![C64::new(0.0, 0.0), C64::new(1.0, 1.0)],
    };
    let reports: Vec<Result<_>> = mats
        .par_iter()
        .map(|t| convergence_report(t, &config.curve_for(t)?, &params))
        .collect();
    let mut checks = CheckTable::new();
    let (mut gaps, mut errors) = (Vec::new(), 0);
    for (t, report) in mats.iter().zip(reports) {
        let hash = inputs_hash(&[t]);
        match report {
            Ok(r) => {
                for x in r.rows_for("logdet-gap") {
                    gaps.push(x.value);
                    checks.push(&hash, row("logdet-gap", report_row(x).key, x.value, 1e-3));
                }
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("logdet-gap", format!("error={}", e.kind()), false));
            }
        }
    }
    let measures = vec![worst("logdet-gap", gaps, 1e-3), count_at_most("errors", errors, 0)];
    Ok(CriterionResult::new(6, mats.len(), measures, checks))
}

// Criterion 7.

fn coordinate_projection(n: usize, k: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j && i < k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn determinant_monotonicity(seed: u64, config: &RunConfig) -> Result<CriterionResult> {
    let s = sub_seed(seed, 7);
    let mats = draw(&ginibre(8), s, 20)?;
    let params = ConvergenceParams {
        levels: (0..=10).collect(),
        epsilons: Vec::new(),
        masses: vec![1, 10, 100],
        points: Vec::new(),
    };
    let reports: Vec<Result<_>> = mats
        .par_iter()
        .map(|t| convergence_report(t, &config.curve_for(t)?, &params))
        .collect();
    let mut checks = CheckTable::new();
    let (mut monotone_fail, mut identity, mut errors) = (0, Vec::new(), 0);
    for (t, report) in mats.iter().zip(reports) {
        let hash = inputs_hash(&[t]);
        match report {
            Ok(r) => {
                for x in r.rows_for("pinch-det") {
                    monotone_fail += usize::from(!x.pass);
                    checks.push(&hash, report_row(x));
                }
                for x in r.rows_for("pinch-det-identity") {
                    identity.push(x.value / (x.bound / 1e-8));
                    checks.push(&hash, report_row(x));
                }
            }
            Err(e) => {
                errors += 1;
                checks.push(&hash, flag_row("pinch-det", format!("error={}", e.kind()), false));
            }
        }
    }

    let upper = EnsembleKind::UpperTriangularRandom {
        n: 6,
        diagonal_law: DiagonalLaw::Gaussian,
    };
    let trials: Vec<Result<(ComplexMatrix, usize, crate::majorization::PinchReport)>> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(sub_seed(seed, 70), i);
            let k = rng.random_range(0..=6);
            let mut t = member(&upper, sub_seed(seed, 71), i)?;
            let mut p = coordinate_projection(6, k);
            // Odd trials move the pair out of the coordinate frame.
            if i % 2 == 1 {
                let u = haar_unitary(&mut rng, 6);
                t = ComplexMatrix::new(&u * t.as_matrix() * u.adjoint())?;
                p = &u * p * u.adjoint();
            }
            let report = pinch_log_check(&t, &p)?;
            Ok((t, k, report))
        })
        .collect();
    let mut pinch_fail = 0;
    for trial in trials {
        match trial {
            Ok((t, k, report)) => {
                let hash = inputs_hash(&[&t]);
                pinch_fail += usize::from(!report.passed());
                for mut r in report.log_majorization.rows.iter().cloned() {
                    r.key = format!("rank={k};{}", r.key);
                    checks.push(&hash, r);
                }
                let mut d = report.determinant.clone();
                d.key = format!("rank={k}");
                checks.push(&hash, d);
            }
            Err(e) => {
                errors += 1;
                checks.push("", flag_row("pinch-log", format!("error={}", e.kind()), false));
            }
        }
    }
    let measures = vec![
        count_at_most("monotonicity-failures", monotone_fail, 0),
        worst("pinch-identity-relative", identity, 1e-8),
        count_at_most("pinch-log-failures", pinch_fail, 0),
        count_at_most("errors", errors, 0),
    ];
    Ok(CriterionResult::new(7, mats.len() + 500, measures, checks))
}

// Criterion 8.

const BROWN_GRID: usize = 301;
const BROWN_EPS: f64 = 1e-8;

fn brown_grid() -> Result<CriterionResult> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let eigs = [one, -one, i, -i];
    let diag = ComplexMatrix::diagonal(&eigs)?;
    let mut jordan = CMat::zeros(4, 4);
    for k in 0..3 {
        jordan[(k, k + 1)] = one;
    }
    let jordan = ComplexMatrix::new(jordan)?;

    let mut checks = CheckTable::new();
    let mut measures = Vec::new();

    let grid = brown_density_grid(&diag, GridBounds::default_for(&diag), (BROWN_GRID, BROWN_GRID), BROWN_EPS)?;
    let hash = inputs_hash(&[&diag]);
    let total_gap = (grid.total_mass - 1.0).abs();
    checks.push(&hash, row("brown-total-mass", "diag".into(), total_gap, 0.02));
    measures.push(Diagnostic::at_most("diag-total-mass-gap", total_gap, 0.02));
    let disk_gaps: Vec<f64> = eigs
        .iter()
        .map(|z| {
            let gap = (grid.mass_within(*z, 0.3) - 0.25).abs();
            checks.push(&hash, row("brown-disk-mass", format!("center={}{:+}i", z.re, z.im), gap, 0.02));
            gap
        })
        .collect();
    measures.push(worst("diag-disk-mass-gap", disk_gaps, 0.02));

    let grid = brown_density_grid(
        &jordan,
        GridBounds::default_for(&jordan),
        (BROWN_GRID, BROWN_GRID),
        BROWN_EPS,
    )?;
    let near = grid.mass_within(C64::new(0.0, 0.0), 0.2);
    // Recorded as the deficit below 0.95 so the row reads lhs <= rhs.
    checks.push(&inputs_hash(&[&jordan]), row("brown-jordan-mass", "radius=0.2".into(), 0.95 - near, 0.0));
    measures.push(Diagnostic {
        name: "jordan-mass-within-0.2".into(),
        value: near,
        bound: 0.95,
        pass: near >= 0.95,
    });
    Ok(CriterionResult::new(8, 2, measures, checks))
}

// Criterion 9.

fn diag_real(values: &[f64]) -> Result<ComplexMatrix> {
    let d: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    ComplexMatrix::diagonal(&d)
}

/// `(T, diag |eig T|)`, which satisfies the classical Weyl log-majorization.
fn weyl_pair(t: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let mut moduli: Vec<f64> = linalg::eigenvalues(t.as_matrix())?.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok((t.clone(), diag_real(&moduli)?))
}

/// Random pair from one of four sources chosen by `i mod 4`: Weyl pairs,
/// independent Ginibre pairs, `(A, c A U)` with `c` near 1, and `(A, A X)`
/// for a contraction `X`.
fn mixed_pair(seed: u64, i: u64, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let a = member(&ginibre(n), seed, 2 * i)?;
    let mut rng = rng_for(seed ^ 0x5eed, i);
    match i % 4 {
        0 => weyl_pair(&a),
        1 => Ok((a, member(&ginibre(n), seed, 2 * i + 1)?)),
        2 => {
            let c = 0.8 + 0.4 * rng.random::<f64>();
            let u = haar_unitary(&mut rng, n);
            let b = ComplexMatrix::new(a.as_matrix() * u * C64::new(c, 0.0))?;
            Ok((a, b))
        }
        _ => {
            let x = CMat::from_fn(n, n, |_, _| gaussian(&mut rng, 1.0));
            let x = &x / C64::new(op_norm(&x), 0.0);
            let b = ComplexMatrix::new(a.as_matrix() * x)?;
            Ok((a, b))
        }
    }
}

fn psd_from_abs(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let a = linalg::abs(t.as_matrix());
    ComplexMatrix::new((&a + a.adjoint()) * C64::new(0.5, 0.0))
}

fn psd(x: &CMat) -> Result<ComplexMatrix> {
    let g = x * x.adjoint();
    ComplexMatrix::new((&g + g.adjoint()) * C64::new(0.5, 0.0))
}

/// PSD candidate pair for the shift check; `i mod 3` picks `(|T|, diag|eig|)`,
/// an independent Wishart pair, or `(A, X A X*)` with `|X| <= 1`.
fn psd_candidate(seed: u64, i: u64, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let t = member(&ginibre(n), seed, 2 * i)?;
    let mut rng = rng_for(seed ^ 0x9510, i);
    match i % 3 {
        0 => {
            let (_, d) = weyl_pair(&t)?;
            Ok((psd_from_abs(&t)?, d))
        }
        1 => {
            let s = member(&ginibre(n), seed, 2 * i + 1)?;
            Ok((psd(t.as_matrix())?, psd(s.as_matrix())?))
        }
        _ => {
            let a = psd(t.as_matrix())?;
            let x = CMat::from_fn(n, n, |_, _| gaussian(&mut rng, 1.0));
            let x = &x / C64::new(op_norm(&x), 0.0);
            let b = x.clone() * a.as_matrix() * x.adjoint();
            let b = ComplexMatrix::new((&b + b.adjoint()) * C64::new(0.5, 0.0))?;
            Ok((a, b))
        }
    }
}

fn majorization_suite(seed: u64) -> Result<CriterionResult> {
    let mut checks = CheckTable::new();

    // Classical Weyl pairs.
    let mats = draw(&ginibre(16), sub_seed(seed, 9), 200)?;
    let weyl: Vec<Result<_>> = mats
        .par_iter()
        .map(|t| {
            let (a, b) = weyl_pair(t)?;
            log_submajorizes(&a, &b)
        })
        .collect();
    let mut weyl_fail = 0;
    for (t, v) in mats.iter().zip(weyl) {
        let v = v?;
        weyl_fail += usize::from(!v.holds);
        let hash = inputs_hash(&[t]);
        for mut r in v.rows {
            r.check = "weyl-oracle";
            checks.push(&hash, r);
        }
    }

    // log_+ biconditional.
    let s_eq = sub_seed(seed, 91);
    let equivalence: Vec<Result<_>> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let (a, b) = mixed_pair(s_eq, i, 6)?;
            let r = log_plus_equivalence_check(&a, &b, &[])?;
            Ok((inputs_hash(&[&a, &b]), r))
        })
        .collect();
    let (mut disagree, mut true_count) = (0, 0);
    for item in equivalence {
        let (hash, r) = item?;
        disagree += usize::from(!r.agree);
        true_count += usize::from(r.log_submajorized);
        let key = format!("logsub={};logplus={}", r.log_submajorized, r.log_plus_dominated);
        checks.push(&hash, flag_row("log-plus-equivalence", key, r.agree));
    }

    // Shift lemma on hypothesis-filtered PSD pairs.
    let s_shift = sub_seed(seed, 92);
    let mut accepted = Vec::new();
    let mut i = 0u64;
    while accepted.len() < 500 && i < 50_000 {
        let (a, b) = psd_candidate(s_shift, i, 6)?;
        if log_submajorizes(&a, &b)?.holds {
            accepted.push((a, b));
        }
        i += 1;
    }
    let shift: Vec<Result<_>> = accepted.par_iter().map(|(a, b)| shift_lemma_check(a, b)).collect();
    let (mut shift_fail, mut shift_skipped) = (0, 0);
    for ((a, b), r) in accepted.iter().zip(shift) {
        let r = r?;
        shift_skipped += usize::from(!r.precondition);
        shift_fail += r.failures();
        checks.extend(&inputs_hash(&[a, b]), &r.rows);
    }

    // Scaling invariance of both comparators.
    let s_scale = sub_seed(seed, 93);
    let scaling: Vec<Result<_>> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let (a, b) = mixed_pair(s_scale, i, 6)?;
            let base = (submajorizes(&a, &b)?.holds, log_submajorizes(&a, &b)?.holds);
            let mut rows = Vec::new();
            for c in [0.01, 100.0] {
                let scale = |m: &ComplexMatrix| ComplexMatrix::new(m.as_matrix() * C64::new(c, 0.0));
                let (ca, cb) = (scale(&a)?, scale(&b)?);
                let lin = submajorizes(&ca, &cb)?.holds == base.0;
                let log = log_submajorizes(&ca, &cb)?.holds == base.1;
                rows.push(flag_row("scaling-submajorization", format!("c={c}"), lin));
                rows.push(flag_row("scaling-log-submajorization", format!("c={c}"), log));
            }
            Ok((inputs_hash(&[&a, &b]), rows))
        })
        .collect();
    let mut scale_fail = 0;
    for item in scaling {
        let (hash, rows) = item?;
        for r in rows {
            scale_fail += usize::from(r.pass == Status::Fail);
            checks.push(&hash, r);
        }
    }

    let measures = vec![
        count_at_most("weyl-oracle-failures", weyl_fail, 0),
        count_at_most("log-plus-disagreements", disagree, 0),
        Diagnostic {
            name: "log-plus-true-verdicts".into(),
            value: true_count as f64,
            bound: 1.0,
            pass: (1..1000).contains(&true_count),
        },
        count_at_most("shift-accepted-shortfall", 500 - accepted.len(), 0),
        count_at_most("shift-skipped", shift_skipped, 0),
        count_at_most("shift-failures", shift_fail, 0),
        count_at_most("scaling-disagreements", scale_fail, 0),
    ];
    Ok(CriterionResult::new(9, 200 + 1000 + accepted.len() + 200, measures, checks))
}
