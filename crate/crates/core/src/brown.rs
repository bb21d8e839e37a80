//! Brown measures: the exact eigenvalue counting measure of a matrix and a
//! grid estimator that recovers it from the regularized log potential.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::det::regularized_log_det_matrix;
use crate::error::{Error, Result};
use crate::linalg::{self, cluster_values, lex_cmp, CLUSTER_TOL};
use crate::matrix::{ComplexMatrix, C64};

const NEGATIVE_FLAG: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub re: f64,
    pub im: f64,
    pub w: f64,
}

impl Atom {
    pub fn location(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Finitely supported probability measure on the plane, serialized as
/// `[{"re": .., "im": .., "w": ..}, ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
}

impl SpectralMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().any(|a| !(a.w > 0.0)) {
            return Err(Error::param("atoms", "weights must be positive"));
        }
        let total: f64 = atoms.iter().map(|a| a.w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("atoms", format!("weights sum to {total}, not 1")));
        }
        Ok(SpectralMeasure { atoms })
    }

    /// Counting measure of a list of points, merging points closer than
    /// `tol`; each merged atom sits at the mean of its members.
    pub fn counting(points: &[C64], tol: f64) -> Self {
        let n = points.len() as f64;
        let mut atoms: Vec<Atom> = cluster_values(points, tol)
            .into_iter()
            .map(|members| {
                let mean = members.iter().map(|&i| points[i]).sum::<C64>() / members.len() as f64;
                Atom {
                    re: mean.re,
                    im: mean.im,
                    w: members.len() as f64 / n,
                }
            })
            .collect();
        atoms.sort_by(|a, b| lex_cmp(&a.location(), &b.location()));
        SpectralMeasure { atoms }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// Atom locations repeated by multiplicity `round(w n)`.
    pub fn expanded(&self, n: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(n);
        for atom in &self.atoms {
            let copies = (atom.w * n as f64).round() as usize;
            out.extend(std::iter::repeat_n(atom.location(), copies));
        }
        out
    }

    pub fn integrate(&self, f: impl Fn(C64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.w * f(a.location())).sum()
    }

    /// `int log|z - lambda| d nu(z)`.
    pub fn log_potential(&self, lambda: C64) -> f64 {
        self.integrate(|z| (z - lambda).norm().ln())
    }

    /// `int log(|z - lambda|^2 + eps) d nu(z)`.
    pub fn regularized_potential(&self, lambda: C64, eps: f64) -> f64 {
        self.integrate(|z| ((z - lambda).norm_sqr() + eps).ln())
    }

    pub fn mass_within(&self, center: C64, radius: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.location() - center).norm() <= radius)
            .map(|a| a.w)
            .sum()
    }
}

/// Eigenvalue counting measure; eigenvalues within `1e-10 |T|` form one atom
/// of weight `multiplicity / n`.
pub fn brown_measure_exact(t: &ComplexMatrix) -> Result<SpectralMeasure> {
    let eigenvalues = linalg::eigenvalues(t.as_matrix())?;
    Ok(SpectralMeasure::counting(&eigenvalues, CLUSTER_TOL * t.op_norm()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl GridBounds {
    pub fn square(half_side: f64) -> Self {
        GridBounds {
            re_min: -half_side,
            re_max: half_side,
            im_min: -half_side,
            im_max: half_side,
        }
    }

    /// Square of half-side `1.25 |T|`, which contains the closed ball holding
    /// the spectrum.
    pub fn default_for(t: &ComplexMatrix) -> Self {
        Self::square((1.25 * t.op_norm()).max(1e-3))
    }

    fn contains_disk(&self, center: C64, radius: f64) -> bool {
        center.re - radius >= self.re_min
            && center.re + radius <= self.re_max
            && center.im - radius >= self.im_min
            && center.im + radius <= self.im_max
    }
}

/// Point masses recovered on a uniform grid. Grid node `(ix, iy)` sits at
/// `(re_min + ix hx, im_min + iy hy)`; `cell_mass` is stored with `ix`
/// varying fastest. Boundary nodes carry no mass.
///
/// Raw masses in `[-1e-6, 0)` are rounded up to zero. Larger negative masses
/// are kept and counted in `flagged_negative`: they appear next to an
/// eigenvalue sitting on a grid node when `eps` is far below the cell area,
/// and dropping them would inflate the total.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub bounds: GridBounds,
    pub nx: usize,
    pub ny: usize,
    pub epsilon: f64,
    pub cell_mass: Vec<f64>,
    pub total_mass: f64,
    /// Nodes whose raw mass fell below `-1e-6`.
    pub flagged_negative: usize,
    pub most_negative: f64,
}

impl DensityGrid {
    pub fn node(&self, ix: usize, iy: usize) -> C64 {
        let hx = (self.bounds.re_max - self.bounds.re_min) / (self.nx - 1) as f64;
        let hy = (self.bounds.im_max - self.bounds.im_min) / (self.ny - 1) as f64;
        C64::new(
            self.bounds.re_min + ix as f64 * hx,
            self.bounds.im_min + iy as f64 * hy,
        )
    }

    pub fn mass(&self, ix: usize, iy: usize) -> f64 {
        self.cell_mass[iy * self.nx + ix]
    }

    pub fn mass_within(&self, center: C64, radius: f64) -> f64 {
        let mut acc = 0.0;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                if (self.node(ix, iy) - center).norm() <= radius {
                    acc += self.mass(ix, iy);
                }
            }
        }
        acc
    }

    /// First line `re_min=..,re_max=..,im_min=..,im_max=..,nx=..,ny=..,epsilon=..`,
    /// then `x,y,mass` rows for every node.
    pub fn to_csv(&self) -> String {
        let b = &self.bounds;
        let mut out = String::with_capacity(self.nx * self.ny * 24);
        let _ = writeln!(
            out,
            "re_min={},re_max={},im_min={},im_max={},nx={},ny={},epsilon={}",
            b.re_min, b.re_max, b.im_min, b.im_max, self.nx, self.ny, self.epsilon
        );
        out.push_str("x,y,mass\n");
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let z = self.node(ix, iy);
                let _ = writeln!(out, "{},{},{}", z.re, z.im, self.mass(ix, iy));
            }
        }
        out
    }
}

/// Numerical Brown measure: the 5-point Laplacian of
/// `phi(lambda) = (1/2) tau(log(|T - lambda|^2 + eps))`, scaled by
/// `h_x h_y / (2 pi)` so each node carries the mass of its cell.
pub fn brown_density_grid(
    t: &ComplexMatrix,
    bounds: GridBounds,
    resolution: (usize, usize),
    eps: f64,
) -> Result<DensityGrid> {
    let (nx, ny) = resolution;
    if nx < 32 || ny < 32 {
        return Err(Error::param("resolution", format!("need at least 32 per axis, got {nx}x{ny}")));
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    if !(bounds.re_max > bounds.re_min && bounds.im_max > bounds.im_min) {
        return Err(Error::GridBounds("empty rectangle".into()));
    }
    let radius = t.op_norm() + 3.0 * eps.sqrt();
    if !bounds.contains_disk(C64::new(0.0, 0.0), radius) {
        return Err(Error::GridBounds(format!(
            "bounds must contain the disk of radius |T| + 3 sqrt(eps) = {radius:e}"
        )));
    }

    let hx = (bounds.re_max - bounds.re_min) / (nx - 1) as f64;
    let hy = (bounds.im_max - bounds.im_min) / (ny - 1) as f64;
    let m = t.as_matrix();
    let potential: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let lambda = C64::new(
                bounds.re_min + (idx % nx) as f64 * hx,
                bounds.im_min + (idx / nx) as f64 * hy,
            );
            0.5 * regularized_log_det_matrix(m, lambda, eps)
        })
        .collect();

    let scale = hx * hy / (2.0 * PI);
    let mut cell_mass = vec![0.0; nx * ny];
    let mut flagged_negative = 0;
    let mut most_negative: f64 = 0.0;
    for iy in 1..ny - 1 {
        for ix in 1..nx - 1 {
            let c = potential[iy * nx + ix];
            let lap = (potential[iy * nx + ix + 1] - 2.0 * c + potential[iy * nx + ix - 1]) / (hx * hx)
                + (potential[(iy + 1) * nx + ix] - 2.0 * c + potential[(iy - 1) * nx + ix]) / (hy * hy);
            let mass = lap * scale;
            most_negative = most_negative.min(mass);
            cell_mass[iy * nx + ix] = if mass < -NEGATIVE_FLAG {
                flagged_negative += 1;
                mass
            } else {
                mass.max(0.0)
            };
        }
    }
    let total_mass = cell_mass.iter().sum();
    Ok(DensityGrid {
        bounds,
        nx,
        ny,
        epsilon: eps,
        cell_mass,
        total_mass,
        flagged_negative,
        most_negative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exact_measures() {
        let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let mu = brown_measure_exact(&d).unwrap();
        assert_eq!(mu.atoms().len(), 2);
        assert!(mu.atoms().iter().all(|a| (a.w - 0.5).abs() < 1e-15));
        assert!((mu.mass_within(c(0.0, 1.0), 1e-12) - 0.5).abs() < 1e-15);

        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let mu = brown_measure_exact(&nil).unwrap();
        assert_eq!(mu.atoms(), &[Atom { re: 0.0, im: 0.0, w: 1.0 }]);
    }

    #[test]
    fn json_shape() {
        let mu = SpectralMeasure::counting(&[c(1.0, 0.0), c(2.0, -1.0)], 0.0);
        let text = serde_json::to_string(&mu).unwrap();
        assert_eq!(text, r#"[{"re":1.0,"im":0.0,"w":0.5},{"re":2.0,"im":-1.0,"w":0.5}]"#);
        let back: SpectralMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
        assert!(SpectralMeasure::new(vec![Atom { re: 0.0, im: 0.0, w: 0.4 }]).is_err());
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        let t = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let b = GridBounds::square(2.0);
        assert!(brown_density_grid(&t, b, (16, 64), 1e-8).is_err());
        assert!(brown_density_grid(&t, b, (64, 64), 0.0).is_err());
        assert!(matches!(
            brown_density_grid(&t, GridBounds::square(0.9), (64, 64), 1e-8),
            Err(Error::GridBounds(_))
        ));
    }

    #[test]
    fn scalar_matrix_concentrates_mass() {
        let t = ComplexMatrix::diagonal(&[c(0.3, -0.2); 3]).unwrap();
        let grid = brown_density_grid(&t, GridBounds::square(1.0), (101, 101), 1e-8).unwrap();
        assert!((grid.total_mass - 1.0).abs() < 0.02, "total {}", grid.total_mass);
        assert!(grid.mass_within(c(0.3, -0.2), 0.05) > 0.98);
    }

    #[test]
    fn csv_header_and_rows() {
        let t = ComplexMatrix::diagonal(&[c(0.0, 0.0)]).unwrap();
        let grid = brown_density_grid(&t, GridBounds::square(1.0), (32, 32), 1e-4).unwrap();
        let csv = grid.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "re_min=-1,re_max=1,im_min=-1,im_max=1,nx=32,ny=32,epsilon=0.0001"
        );
        assert_eq!(lines.next().unwrap(), "x,y,mass");
        assert_eq!(lines.count(), 32 * 32);
    }
}
