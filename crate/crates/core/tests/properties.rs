mod common;

use common::*;
use proptest::prelude::*;
use spectral_nest::brown::brown_measure_exact;
use spectral_nest::curve::HilbertCurveMap;
use spectral_nest::decompose::decompose;
use spectral_nest::det::{block_det_identity_check, fk_determinant};
use spectral_nest::ensemble::{generate, DiagonalLaw, EnsembleKind, EnsembleSpec};
use spectral_nest::expectation::{expectation_dyadic, expectation_full, pinch_full};
use spectral_nest::hs::build_nest;
use spectral_nest::linalg::hermitian_function;
use spectral_nest::majorization::{
    log_submajorizes, submajorizes, submajorizes_values, weyl_check, ConvexGauge, Status,
};
use spectral_nest::schur::ordered_schur;
use spectral_nest::spectral::{distribution_function, singular_value_function};
use spectral_nest::{normalized_trace, CMat, ComplexMatrix, C64};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn unitary(seed: u64, n: usize) -> CMat {
    random_unitary(&mut rng(seed ^ 0x5555), n)
}

fn conj(u: &CMat, t: &CMat) -> ComplexMatrix {
    ComplexMatrix::new(u * t * u.adjoint()).unwrap()
}

fn sorted_spectrum(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn map_for(t: &ComplexMatrix) -> HilbertCurveMap {
    HilbertCurveMap::for_matrix(t, 16, 1.25).unwrap()
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn singular_values_match_gram_oracle(seed in any::<u64>(), n in 1usize..8) {
        let t = random_matrix(seed, n);
        let mu = singular_value_function(&t);
        let oracle = singular_values_via_gram(t.as_matrix());
        for (k, s) in oracle.iter().enumerate() {
            let mid = (k as f64 + 0.5) / n as f64;
            prop_assert!((mu.eval(mid) - s).abs() <= 1e-7 * oracle[0].max(1.0));
        }
        let u = unitary(seed, n);
        let v = unitary(seed.wrapping_add(1), n);
        let rotated = ComplexMatrix::new(&u * t.as_matrix() * &v).unwrap();
        let mu2 = singular_value_function(&rotated);
        for k in 0..n {
            let mid = (k as f64 + 0.5) / n as f64;
            prop_assert!((mu.eval(mid) - mu2.eval(mid)).abs() <= 1e-10 * oracle[0].max(1.0));
        }
    }

    #[test]
    fn distribution_function_is_dual_to_mu(seed in any::<u64>(), n in 1usize..7, s in 0.0f64..3.0) {
        let a = random_psd(&mut rng(seed), n);
        let mu = singular_value_function(&a);
        let count = (0..n).filter(|&k| mu.eval((k as f64 + 0.5) / n as f64) > s).count();
        prop_assert_eq!(distribution_function(&a, s).unwrap(), count as f64 / n as f64);
    }

    #[test]
    fn ordered_schur_is_a_unitary_similarity(seed in any::<u64>(), n in 1usize..8) {
        let t = random_matrix(seed, n);
        let s = ordered_schur(&t, |a, b| a.norm().total_cmp(&b.norm())).unwrap();
        let id = CMat::identity(n, n);
        prop_assert!(norm(&(s.unitary.adjoint() * &s.unitary - id)) < 1e-12);
        let rebuilt = &s.unitary * &s.triangular * s.unitary.adjoint();
        prop_assert!(norm(&(rebuilt - t.as_matrix())) < 1e-12 * t.op_norm().max(1.0));
        for i in 0..n {
            for j in 0..i {
                prop_assert!(s.triangular[(i, j)].norm() < 1e-12);
            }
        }
        let diag = s.eigenvalues();
        prop_assert!(diag.windows(2).all(|w| w[0].norm() <= w[1].norm() + 1e-12));
        prop_assert!(multiset_gap(&diag, &eigenvalues_via_transpose(t.as_matrix())) < 1e-8);
    }

    #[test]
    fn fk_determinant_is_multiplicative_and_invariant(seed in any::<u64>(), n in 1usize..7) {
        let a = random_matrix(seed, n);
        let b = random_matrix(seed.wrapping_add(7), n);
        let ab = ComplexMatrix::new(a.as_matrix() * b.as_matrix()).unwrap();
        let (da, db, dab) = (fk_determinant(&a), fk_determinant(&b), fk_determinant(&ab));
        prop_assert!((dab - da * db).abs() <= 1e-10 * (da * db).max(1e-300));
        let u = unitary(seed, n);
        prop_assert!((fk_determinant(&conj(&u, a.as_matrix())) - da).abs() <= 1e-10 * da);
        // |det|^(1/n) from the LU determinant.
        let lu = a.as_matrix().determinant().norm().powf(1.0 / n as f64);
        prop_assert!((lu - da).abs() <= 1e-10 * da);
    }

    #[test]
    fn fk_determinant_matches_brown_potential(seed in any::<u64>(), n in 1usize..7, re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let t = random_matrix(seed, n);
        let lambda = C64::new(re, im);
        let shifted = ComplexMatrix::new(t.as_matrix() - CMat::identity(n, n) * lambda).unwrap();
        let nu = brown_measure_exact(&t).unwrap();
        let d = fk_determinant(&shifted);
        prop_assume!(d > 1e-6);
        prop_assert!((d.ln() - nu.log_potential(lambda)).abs() <= 1e-8);
    }

    #[test]
    fn brown_measure_is_similarity_invariant(seed in any::<u64>(), n in 1usize..7) {
        let t = random_matrix(seed, n);
        // A well-conditioned similarity: identity plus a small perturbation.
        let s = CMat::identity(n, n) + gaussian_matrix(&mut rng(seed ^ 99), n) * C64::new(0.3, 0.0);
        let s_inv = s.clone().try_inverse().unwrap();
        let similar = ComplexMatrix::new(&s * t.as_matrix() * s_inv).unwrap();
        let a = sorted_spectrum(brown_measure_exact(&t).unwrap().expanded(n));
        let b = sorted_spectrum(brown_measure_exact(&similar).unwrap().expanded(n));
        prop_assume!(a.windows(2).all(|w| (w[0] - w[1]).norm() > 1e-3));
        prop_assert!(multiset_gap(&a, &b) < 1e-7);
        let total: f64 = brown_measure_exact(&t).unwrap().total_mass();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nest_compressions_follow_hit_times(seed in any::<u64>(), n in 1usize..8) {
        let t = random_matrix(seed, n);
        let build = build_nest(&t, &map_for(&t)).unwrap();
        let b = build.nest.basis();
        prop_assert!(norm(&(b.adjoint() * b - CMat::identity(n, n))) < 1e-12);
        let tri = b.adjoint() * t.as_matrix() * b;
        for jump in build.nest.jumps().iter().skip(1) {
            let k = jump.rank;
            let mut inside: Vec<C64> = (0..k).map(|i| tri[(i, i)]).collect();
            let oracle = eigenvalues_via_transpose(&tri.view((0, 0), (k, k)).into_owned());
            prop_assert!(multiset_gap(&sorted_spectrum(inside.clone()), &oracle) < 1e-8);
            let mut expected: Vec<C64> = build
                .clusters
                .iter()
                .filter(|c| c.hit_time <= jump.t)
                .flat_map(|c| std::iter::repeat_n(c.location(), c.multiplicity))
                .collect();
            prop_assert_eq!(inside.len(), expected.len());
            inside = sorted_spectrum(inside);
            expected = sorted_spectrum(expected);
            prop_assert!(multiset_gap(&inside, &expected) < 1e-6);
        }
        prop_assert!(build.nest.invariance_defect(t.as_matrix()) <= 1e-9 * t.op_norm().max(1.0));
    }

    #[test]
    fn normal_inputs_decompose_trivially(seed in any::<u64>(), n in 1usize..7) {
        let mut g = rng(seed);
        let u = random_unitary(&mut g, n);
        let d = CMat::from_diagonal(&gaussian_matrix(&mut g, n).column(0).into_owned());
        let t = conj(&u, &d);
        let r = decompose(&t, &map_for(&t)).unwrap();
        let scale = t.op_norm().max(1.0);
        prop_assert!(norm(&(r.normal.as_matrix() - t.as_matrix())) < 1e-9 * scale);
        prop_assert!(norm(r.nilpotent.as_matrix()) < 1e-9 * scale);
    }

    #[test]
    fn decomposition_parts(seed in any::<u64>(), n in 1usize..8) {
        let t = random_matrix(seed, n);
        let r = decompose(&t, &map_for(&t)).unwrap();
        let (nm, q) = (r.normal.as_matrix(), r.nilpotent.as_matrix());
        let scale = t.op_norm().max(1.0);
        prop_assert!(norm(&(nm + q - t.as_matrix())) < 1e-10 * scale);
        prop_assert!(norm(&(nm * nm.adjoint() - nm.adjoint() * nm)) < 1e-9 * scale * scale);
        prop_assert!(multiset_gap(&eigenvalues_via_transpose(nm), &eigenvalues_via_transpose(t.as_matrix())) < 1e-7);
        // Q^n = 0 and Q is strictly upper in the nest basis.
        let mut power = CMat::identity(n, n);
        for _ in 0..n {
            power = &power * q;
        }
        prop_assert!(norm(&power) <= 1e-8 * scale.powi(n as i32));
        let b = r.nest.basis();
        let tri = b.adjoint() * q * b;
        for i in 0..n {
            for j in 0..=i {
                prop_assert!(tri[(i, j)].norm() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn expectation_is_a_trace_preserving_bimodule_map(seed in any::<u64>(), n in 1usize..8, level in 0u32..6) {
        let t = random_matrix(seed, n);
        let nest = build_nest(&t, &map_for(&t)).unwrap().nest;
        let e = expectation_dyadic(&t, &nest, level).unwrap();
        let e_c = ComplexMatrix::new(e.clone()).unwrap();
        prop_assert!((normalized_trace(&e_c) - normalized_trace(&t)).norm() < 1e-12);

        let b = nest.basis();
        let mut g = rng(seed ^ 3);
        let mut coeffs = |_: usize| gaussian_matrix(&mut g, 1)[(0, 0)];
        let blocks = nest.dyadic_blocks(level);
        let mut block_scalar = || {
            let mut d = CMat::zeros(n, n);
            for r in &blocks {
                let a = coeffs(0);
                for i in r.clone() {
                    d[(i, i)] = a;
                }
            }
            b * d * b.adjoint()
        };
        let (x, y) = (block_scalar(), block_scalar());
        let inner = ComplexMatrix::new(&x * t.as_matrix() * &y).unwrap();
        let lhs = expectation_dyadic(&inner, &nest, level).unwrap();
        prop_assert!(norm(&(lhs - &x * &e * &y)) < 1e-12 * (1.0 + norm(&x) * norm(&y) * t.op_norm()));
    }

    #[test]
    fn dyadic_expectations_converge_at_curve_rate(seed in any::<u64>(), n in 1usize..7, level in 0u32..10) {
        let t = random_matrix(seed, n);
        let build = build_nest(&t, &map_for(&t)).unwrap();
        let nest = build.nest;
        let omega = build.map.modulus(2f64.powi(-(level as i32)));
        let e = expectation_dyadic(&t, &nest, level).unwrap();
        prop_assert!(norm(&(&e - expectation_full(&t, &nest).unwrap())) <= omega);
        let radius = eigenvalues_via_transpose(&(t.as_matrix() - &e)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(radius <= omega + 1e-6);
    }

    #[test]
    fn pinching_preserves_the_determinant(seed in any::<u64>(), n in 1usize..8) {
        let t = random_matrix(seed, n);
        let nest = build_nest(&t, &map_for(&t)).unwrap().nest;
        let pinched = ComplexMatrix::new(pinch_full(&t, &nest).unwrap()).unwrap();
        let (d, dp) = (fk_determinant(&t), fk_determinant(&pinched));
        prop_assert!((d - dp).abs() <= 1e-8 * d.max(1.0));
        let p = nest.projection(nest.jumps()[nest.jumps().len() / 2].t);
        let r = block_det_identity_check(&t, &p).unwrap();
        prop_assert!(r.det_gap <= 1e-8 * d.max(1.0));
    }

    #[test]
    fn submajorization_is_scale_invariant(seed in any::<u64>(), n in 1usize..7) {
        let a = random_matrix(seed, n);
        let b = ComplexMatrix::new(pinch_like(&a, seed)).unwrap();
        for c in [0.01, 1.0, 100.0] {
            let s = C64::new(c, 0.0);
            let (ac, bc) = (
                ComplexMatrix::new(b.as_matrix() * s).unwrap(),
                ComplexMatrix::new(a.as_matrix() * s).unwrap(),
            );
            prop_assert!(submajorizes(&bc, &ac).unwrap().holds);
            prop_assert!(log_submajorizes(&ac, &bc).unwrap().holds == log_submajorizes(&b, &a).unwrap().holds);
        }
    }

    #[test]
    fn weyl_inequality_and_equality(seed in any::<u64>(), n in 1usize..8) {
        let t = random_matrix(seed, n);
        let mut moduli: Vec<f64> = eigenvalues_via_transpose(t.as_matrix()).iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        prop_assert!(log_submajorizes(&t, &real_diag(&moduli)).unwrap().holds);
        let w = weyl_check(&t, &ConvexGauge::default_battery(), &map_for(&t)).unwrap();
        prop_assert!(w.passed());
        for row in &w.equality {
            prop_assert!((row.lhs - row.rhs).abs() <= 1e-9);
        }
    }
}

/// Block-diagonal part of `a` for a random two-block split.
fn pinch_like(a: &ComplexMatrix, seed: u64) -> CMat {
    let n = a.dim();
    let k = (seed as usize) % (n + 1);
    CMat::from_fn(n, n, |i, j| if (i < k) == (j < k) { a.as_matrix()[(i, j)] } else { C64::new(0.0, 0.0) })
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn submajorization_is_transitive(
        x in prop::collection::vec(0.0f64..5.0, 4),
        y in prop::collection::vec(0.0f64..5.0, 4),
        z in prop::collection::vec(0.0f64..5.0, 4),
    ) {
        if submajorizes_values(&x, &y).holds && submajorizes_values(&y, &z).holds {
            prop_assert!(submajorizes_values(&x, &z).holds);
        }
    }
}

#[test]
fn log_and_linear_submajorization_agree_above_identity() {
    let mut agreed = 0;
    let mut g = rng(77);
    for _ in 0..500 {
        let n = 4;
        let a = random_psd(&mut g, n);
        let b = random_psd(&mut g, n);
        let shift = |m: &ComplexMatrix| ComplexMatrix::new(m.as_matrix() + CMat::identity(n, n)).unwrap();
        let (a, b) = (shift(&a), shift(&b));
        let la = ComplexMatrix::new(hermitian_function(a.as_matrix(), f64::ln).unwrap()).unwrap();
        let lb = ComplexMatrix::new(hermitian_function(b.as_matrix(), f64::ln).unwrap()).unwrap();
        let log_verdict = log_submajorizes(&a, &b).unwrap();
        let lin_verdict = submajorizes(&la, &lb).unwrap();
        if log_verdict.worst_margin.abs() < 1e-8 || lin_verdict.worst_margin.abs() < 1e-8 {
            continue;
        }
        assert_eq!(log_verdict.holds, lin_verdict.holds);
        assert!(log_verdict.rows.iter().zip(&lin_verdict.rows).all(|(p, q)| (p.pass == Status::Pass) == (q.pass == Status::Pass)));
        agreed += 1;
    }
    assert!(agreed > 400);
}

#[test]
fn ensembles_are_deterministic() {
    let kinds = [
        EnsembleKind::Ginibre { n: 5 },
        EnsembleKind::Jordan { lambda: [0.5, -1.0], n: 4 },
        EnsembleKind::UpperTriangularRandom { n: 5, diagonal_law: DiagonalLaw::UniformDisk { radius: 2.0 } },
        EnsembleKind::NormalPlusNilpotent { n: 5, coupling_scale: 0.5 },
    ];
    for kind in kinds {
        let spec = EnsembleSpec::new(kind, 9, 6);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = EnsembleSpec { seed: 10, ..spec.clone() };
        if !matches!(spec.kind, EnsembleKind::Jordan { .. }) {
            assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
        }
    }
}
