#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spectral_nest::{CMat, ComplexMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let s = (0.5 / n as f64).sqrt();
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

pub fn random_matrix(seed: u64, n: usize) -> ComplexMatrix {
    ComplexMatrix::new(gaussian_matrix(&mut rng(seed), n)).unwrap()
}

/// Unitary factor of a Gaussian QR, phases fixed by the diagonal of `R`.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let (mut q, r) = gaussian_matrix(rng, n).qr().unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let col = q.column(j) * (d / d.norm());
        q.set_column(j, &col);
    }
    q
}

pub fn random_psd<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let x = gaussian_matrix(rng, n);
    hermitian(&x * x.adjoint())
}

pub fn hermitian(a: CMat) -> ComplexMatrix {
    ComplexMatrix::new((&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

pub fn real_diag(values: &[f64]) -> ComplexMatrix {
    let d: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    ComplexMatrix::diagonal(&d).unwrap()
}

pub fn upper() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap()
}

pub fn norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values[0]
}

/// Singular values from the eigenvalues of `T* T`, descending.
pub fn singular_values_via_gram(t: &CMat) -> Vec<f64> {
    let g = t.adjoint() * t;
    let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let mut s: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvalues through the transpose, so a second Schur factorization
/// produces them.
pub fn eigenvalues_via_transpose(t: &CMat) -> Vec<C64> {
    t.transpose().schur().eigenvalues().expect("complex Schur is triangular").iter().copied().collect()
}

/// Largest distance under greedy nearest-point matching; adequate for
/// well-separated spectra.
pub fn multiset_gap(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut rest: Vec<C64> = b.to_vec();
    let mut worst: f64 = 0.0;
    for z in a {
        let (k, d) = rest
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        worst = worst.max(d);
        rest.swap_remove(k);
    }
    worst
}
