//! One-sided (Hestenes) Jacobi SVD.
//!
//! Column pairs are rotated until mutually orthogonal, with the stopping test
//! `|g_i* g_j| <= tol |g_i| |g_j|`. The test is invariant under column
//! scaling, so for `G = B D` with `D` diagonal the singular values come out
//! with relative accuracy governed by `cond(B)` rather than `cond(G)`. The
//! power-limit operator relies on this: columns of `(T^n)*` are graded over
//! hundreds of orders of magnitude.

use crate::matrix::{CMat, C64};

const MAX_SWEEPS: usize = 80;

pub struct JacobiSvd {
    /// Decreasing order.
    pub singular_values: Vec<f64>,
    /// Left singular vectors; columns belonging to zero singular values are zero.
    pub left: CMat,
    /// Unitary right factor, `G = left diag(sigma) right*`.
    pub right: CMat,
}

pub fn one_sided_jacobi(g: &CMat) -> JacobiSvd {
    let (rows, n) = (g.nrows(), g.ncols());
    let mut w = g.clone();
    let mut v = CMat::identity(n, n);
    let tol = f64::EPSILON * (rows as f64).sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                // Gram entries of the pair are formed from columns divided by
                // their largest entry, so tiny columns do not underflow.
                let si = max_abs(&w, i);
                let sj = max_abs(&w, j);
                if si == 0.0 || sj == 0.0 {
                    continue;
                }
                let ui = w.column(i).unscale(si);
                let uj = w.column(j).unscale(sj);
                let alpha: f64 = ui.norm_squared();
                let beta: f64 = uj.norm_squared();
                let gamma: C64 = ui.dotc(&uj);
                let g_abs = gamma.norm();
                if g_abs == 0.0 || g_abs <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g_abs;
                let zeta = ((sj / si) * beta - (si / sj) * alpha) / (2.0 * g_abs);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Column j is first rotated by conj(phase) so the Gram entry is real.
                let pc = phase.conj();
                for r in 0..rows {
                    let gi = w[(r, i)];
                    let gj = w[(r, j)] * pc;
                    w[(r, i)] = gi * c - gj * s;
                    w[(r, j)] = gi * s + gj * c;
                }
                for r in 0..n {
                    let vi = v[(r, i)];
                    let vj = v[(r, j)] * pc;
                    v[(r, i)] = vi * c - vj * s;
                    v[(r, j)] = vi * s + vj * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|k| {
            let s = max_abs(&w, k);
            if s == 0.0 {
                0.0
            } else {
                s * w.column(k).unscale(s).norm()
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut left = CMat::zeros(rows, n);
    let mut right = CMat::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        singular_values.push(s);
        if s > 0.0 {
            left.set_column(dst, &w.column(src).unscale(s));
        }
        right.set_column(dst, &v.column(src));
    }
    JacobiSvd {
        singular_values,
        left,
        right,
    }
}

fn max_abs(w: &CMat, k: usize) -> f64 {
    w.column(k).iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max)
}
