//! Singular value functions, distribution functions and spectral nests of
//! positive matrices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{CMat, ComplexMatrix, C64};
use crate::nest::ProjectionNest;

/// Right-continuous decreasing step function on `[0, 1)`. The value on
/// `[breakpoints[i], breakpoints[i + 1])` is `values[i]`; evaluation at
/// `t >= 1` returns `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::param("breakpoints", "need exactly one more breakpoint than values"));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::param("breakpoints", "must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("breakpoints", "must be strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::param("values", "must be nonnegative and weakly decreasing"));
        }
        Ok(StepFunction { breakpoints, values })
    }

    /// Step function taking `values[k]` on `[k/n, (k+1)/n)`.
    pub fn from_uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let breakpoints = (0..=n).map(|k| k as f64 / n as f64).collect();
        Self::new(breakpoints, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let idx = self.breakpoints[1..].partition_point(|&b| b <= t);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// `int_0^t f(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let mut acc = 0.0;
        for (w, &v) in self.breakpoints.windows(2).zip(&self.values) {
            if w[0] >= t {
                break;
            }
            acc += v * (w[1].min(t) - w[0]);
        }
        acc
    }

    /// Two-column CSV `t,value`; the final row records the value 0 at `t = 1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            let _ = writeln!(out, "{b},{v}");
        }
        out.push_str("1,0\n");
        out
    }
}

/// `mu(t, T)`: the `k`-th largest singular value on `[(k-1)/n, k/n)`.
pub fn singular_value_function(t: &ComplexMatrix) -> StepFunction {
    StepFunction::from_uniform(linalg::singular_values(t.as_matrix()))
        .expect("singular values are nonnegative and sorted")
}

/// `d_A(s) = tau(E^A(s, inf))`, the fraction of eigenvalues strictly above `s`.
pub fn distribution_function(a: &ComplexMatrix, s: f64) -> Result<f64> {
    let (values, _) = linalg::psd_eigen(a.as_matrix())?;
    Ok(values.iter().filter(|&&v| v > s).count() as f64 / a.dim() as f64)
}

/// Eigenvector flag of a positive matrix ordered by decreasing eigenvalue,
/// with jumps at `k/n`.
pub fn spectral_nest(a: &ComplexMatrix) -> Result<ProjectionNest> {
    let (_, vectors) = linalg::psd_eigen(a.as_matrix())?;
    ProjectionNest::uniform(vectors)
}

/// `sum_k mu((k-1)/n, A) (p_{k/n} - p_{(k-1)/n})`, the step-integral
/// reconstruction of `A` from its spectral nest.
pub fn reconstruct_from_nest(mu: &StepFunction, nest: &ProjectionNest) -> CMat {
    let n = nest.dim();
    let mut out = CMat::zeros(n, n);
    for (k, range) in nest.increments().into_iter().enumerate() {
        let value = mu.eval(k as f64 / n as f64);
        for col in range {
            let v = nest.basis().column(col);
            out += v * v.adjoint() * C64::new(value, 0.0);
        }
    }
    out
}
