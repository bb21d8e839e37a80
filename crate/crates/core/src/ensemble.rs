//! Seeded random matrix ensembles.
//!
//! Member `i` of an ensemble is drawn from `ChaCha8Rng::seed_from_u64(seed)`
//! on stream `i`, so members are independent of `count` and can be generated
//! in any order.

use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMat, ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum EnsembleKind {
    /// i.i.d. complex Gaussian entries of variance `1/n`.
    Ginibre { n: usize },
    /// Single Jordan block `lambda I + J`.
    Jordan { lambda: [f64; 2], n: usize },
    /// Diagonal drawn from `diagonal_law`, strictly upper entries complex
    /// Gaussian of variance `1/n`.
    #[serde(rename_all = "camelCase")]
    UpperTriangularRandom { n: usize, diagonal_law: DiagonalLaw },
    /// `U (D + c S) U*` with `D` diagonal uniform on the unit disk, `S`
    /// strictly upper Gaussian of variance `1/n`, `U` Haar unitary.
    #[serde(rename_all = "camelCase")]
    NormalPlusNilpotent { n: usize, coupling_scale: f64 },
    /// A matrix JSON file, or a JSON array of matrices.
    FromFile { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "camelCase")]
pub enum DiagonalLaw {
    /// Standard complex Gaussian, `E|z|^2 = 1`.
    Gaussian,
    UniformDisk { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub seed: u64,
    pub count: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, seed: u64, count: usize) -> Self {
        EnsembleSpec { kind, seed, count }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::param("count", "must be at least 1"));
        }
        let n = match &self.kind {
            EnsembleKind::Ginibre { n }
            | EnsembleKind::Jordan { n, .. }
            | EnsembleKind::UpperTriangularRandom { n, .. }
            | EnsembleKind::NormalPlusNilpotent { n, .. } => *n,
            EnsembleKind::FromFile { .. } => return Ok(()),
        };
        if n == 0 {
            return Err(Error::param("n", "dimension must be at least 1"));
        }
        match &self.kind {
            EnsembleKind::Jordan { lambda, .. } if !lambda.iter().all(|v| v.is_finite()) => {
                Err(Error::param("lambda", "must be finite"))
            }
            EnsembleKind::UpperTriangularRandom {
                diagonal_law: DiagonalLaw::UniformDisk { radius },
                ..
            } if !(*radius >= 0.0 && radius.is_finite()) => Err(Error::param("radius", "must be nonnegative")),
            EnsembleKind::NormalPlusNilpotent { coupling_scale, .. } if !coupling_scale.is_finite() => {
                Err(Error::param("couplingScale", "must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Draws the ensemble. For `FromFile` the file content is returned as is and
/// `count` is ignored.
pub fn generate(spec: &EnsembleSpec) -> Result<Vec<ComplexMatrix>> {
    spec.validate()?;
    if let EnsembleKind::FromFile { path } = &spec.kind {
        return read_matrices(path);
    }
    (0..spec.count)
        .into_par_iter()
        .map(|i| member(&spec.kind, spec.seed, i as u64))
        .collect()
}

/// The `index`-th member without generating the others.
pub fn member(kind: &EnsembleKind, seed: u64, index: u64) -> Result<ComplexMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let m = match kind {
        EnsembleKind::Ginibre { n } => ginibre(&mut rng, *n),
        EnsembleKind::Jordan { lambda, n } => {
            let mut m = CMat::identity(*n, *n) * C64::new(lambda[0], lambda[1]);
            for i in 0..n - 1 {
                m[(i, i + 1)] = C64::new(1.0, 0.0);
            }
            m
        }
        EnsembleKind::UpperTriangularRandom { n, diagonal_law } => {
            let mut m = strictly_upper(&mut rng, *n);
            for i in 0..*n {
                m[(i, i)] = match diagonal_law {
                    DiagonalLaw::Gaussian => gaussian(&mut rng, 1.0),
                    DiagonalLaw::UniformDisk { radius } => uniform_disk(&mut rng, *radius),
                };
            }
            m
        }
        EnsembleKind::NormalPlusNilpotent { n, coupling_scale } => {
            let u = haar_unitary(&mut rng, *n);
            let mut core = strictly_upper(&mut rng, *n) * C64::new(*coupling_scale, 0.0);
            for i in 0..*n {
                core[(i, i)] = uniform_disk(&mut rng, 1.0);
            }
            &u * core * u.adjoint()
        }
        EnsembleKind::FromFile { path } => {
            let all = read_matrices(path)?;
            return all
                .into_iter()
                .nth(index as usize)
                .ok_or_else(|| Error::param("index", format!("file has no member {index}")));
        }
    };
    ComplexMatrix::new(m)
}

/// Complex Gaussian with `E|z|^2 = variance`.
pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

pub(crate) fn uniform_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    C64::from_polar(r, theta)
}

pub(crate) fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let variance = 1.0 / n as f64;
    CMat::from_fn(n, n, |_, _| gaussian(rng, variance))
}

fn strictly_upper<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let variance = 1.0 / n as f64;
    CMat::from_fn(n, n, |i, j| if j > i { gaussian(rng, variance) } else { C64::new(0.0, 0.0) })
}

/// QR of a Ginibre matrix with the phases of `R`'s diagonal moved into `Q`.
pub(crate) fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let (mut q, r) = ginibre(rng, n).qr().unpack();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
    }
    q
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    One(ComplexMatrix),
    Many(Vec<ComplexMatrix>),
}

pub fn read_matrices(path: &std::path::Path) -> Result<Vec<ComplexMatrix>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: MatrixFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    match parsed {
        MatrixFile::One(m) => Ok(vec![m]),
        MatrixFile::Many(v) if v.is_empty() => Err(Error::Parse {
            context: path.display().to_string(),
            message: "no matrices in file".into(),
        }),
        MatrixFile::Many(v) => Ok(v),
    }
}

/// Reads exactly one matrix.
pub fn read_matrix(path: &std::path::Path) -> Result<ComplexMatrix> {
    let mut all = read_matrices(path)?;
    if all.len() != 1 {
        return Err(Error::Parse {
            context: path.display().to_string(),
            message: format!("expected one matrix, found {}", all.len()),
        });
    }
    Ok(all.remove(0))
}
