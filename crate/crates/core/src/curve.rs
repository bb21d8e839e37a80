//! Hilbert curve on the square `[-R, R]^2`, used to order points of the
//! plane by the first time the curve reaches them.
//!
//! At level `m` the square is cut into `4^m` cells; cell `d` is the image of
//! `[d/4^m, (d+1)/4^m]` under the continuous curve, and the cells of level
//! `m + 1` inside cell `d` carry indices `4d .. 4d + 3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

pub const MAX_LEVEL: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HilbertCurveMap {
    level: u32,
    half_side: f64,
    modulus_constant: f64,
    /// Quarter turns applied to the standard curve; anchor `k` starts the
    /// curve at corner `i^k (-R - Ri)`.
    #[serde(default)]
    anchor: u8,
}

impl HilbertCurveMap {
    pub fn new(level: u32, half_side: f64) -> Result<Self> {
        Self::with_modulus(level, half_side, 6.0)
    }

    pub fn with_modulus(level: u32, half_side: f64, modulus_constant: f64) -> Result<Self> {
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(Error::param("level", format!("must lie in 1..={MAX_LEVEL}, got {level}")));
        }
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(Error::param("halfSide", format!("must be positive, got {half_side}")));
        }
        if !(modulus_constant > 0.0) {
            return Err(Error::param("modulusConstant", "must be positive"));
        }
        Ok(HilbertCurveMap {
            level,
            half_side,
            modulus_constant,
            anchor: 0,
        })
    }

    /// Curve over the square of half-side `factor * |T|` (or `factor` when
    /// `T = 0`).
    pub fn for_matrix(t: &ComplexMatrix, level: u32, factor: f64) -> Result<Self> {
        if !(factor >= 1.0) {
            return Err(Error::param("halfSideFactor", format!("must be at least 1, got {factor}")));
        }
        let norm = t.op_norm();
        let half_side = if norm > 0.0 { factor * norm } else { factor };
        Self::new(level, half_side)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn modulus_constant(&self) -> f64 {
        self.modulus_constant
    }

    pub fn anchor(&self) -> u8 {
        self.anchor
    }

    pub fn with_anchor(mut self, anchor: u8) -> Self {
        self.anchor = anchor % 4;
        self
    }

    pub fn with_level(mut self, level: u32) -> Result<Self> {
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(Error::param("level", format!("must lie in 1..={MAX_LEVEL}, got {level}")));
        }
        self.level = level;
        Ok(self)
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side_at(self.level)
    }

    fn cell_side_at(&self, level: u32) -> f64 {
        2.0 * self.half_side / 2f64.powi(level as i32)
    }

    /// `omega(dt) = C R sqrt(dt)`.
    pub fn modulus(&self, dt: f64) -> f64 {
        self.modulus_constant * self.half_side * dt.abs().sqrt()
    }

    /// Number of cells at the map's level, `4^m`.
    pub fn cell_count(&self) -> f64 {
        4f64.powi(self.level as i32)
    }

    /// Center of the cell with curve index `floor(t 4^m)`; `t = 1` maps to
    /// the last cell.
    pub fn curve_point(&self, t: f64) -> Result<C64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::param("t", format!("must lie in [0, 1], got {t}")));
        }
        let last = last_index(self.level);
        let d = ((t * self.cell_count()).floor() as u64).min(last);
        Ok(self.cell_center(d))
    }

    pub fn cell_center(&self, d: u64) -> C64 {
        let side_cells = 1u64 << self.level;
        let (x, y) = d2xy(side_cells, d);
        let h = self.cell_side();
        let z = C64::new(
            -self.half_side + (x as f64 + 0.5) * h,
            -self.half_side + (y as f64 + 0.5) * h,
        );
        self.from_standard(z)
    }

    /// `index(z) / 4^m` where `index` is the curve index of the level-`m`
    /// cell containing `z`.
    pub fn first_hit_time(&self, z: C64) -> Result<f64> {
        Ok(self.cell_index(z)? as f64 / self.cell_count())
    }

    pub fn cell_index(&self, z: C64) -> Result<u64> {
        self.cell_index_at(z, self.level)
    }

    /// Curve index of the level-`level` cell containing `z`. Points on a
    /// shared edge or corner resolve to the adjacent cell of smallest index.
    pub fn cell_index_at(&self, z: C64, level: u32) -> Result<u64> {
        let r = self.half_side;
        if !(z.re.abs() <= r && z.im.abs() <= r) {
            return Err(Error::OutsideSquare {
                re: z.re,
                im: z.im,
                half_side: r,
            });
        }
        let w = self.to_standard(z);
        let side_cells = 1u64 << level;
        let h = self.cell_side_at(level);
        let xs = candidates((w.re + r) / h, side_cells);
        let ys = candidates((w.im + r) / h, side_cells);
        let mut best = u64::MAX;
        for &x in xs.iter().flatten() {
            for &y in ys.iter().flatten() {
                best = best.min(xy2d(side_cells, x, y));
            }
        }
        Ok(best)
    }

    fn rotation(&self) -> C64 {
        match self.anchor {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    fn to_standard(&self, z: C64) -> C64 {
        z * self.rotation().conj()
    }

    fn from_standard(&self, z: C64) -> C64 {
        z * self.rotation()
    }
}

fn last_index(level: u32) -> u64 {
    if level >= 32 {
        u64::MAX
    } else {
        (1u64 << (2 * level)) - 1
    }
}

/// Cell coordinates along one axis for a scaled position `s` in `[0, cells]`;
/// on an interior grid line both neighbouring cells qualify.
fn candidates(s: f64, cells: u64) -> [Option<u64>; 2] {
    let k = s.floor();
    if s == k && k > 0.0 {
        let k = k as u64;
        let upper = (k < cells).then_some(k);
        return [Some(k - 1), upper];
    }
    [Some((k.max(0.0) as u64).min(cells - 1)), None]
}

/// Curve index of cell `(x, y)` in an `n x n` grid, `n` a power of two.
fn xy2d(n: u64, mut x: u64, mut y: u64) -> u64 {
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        rot(n, &mut x, &mut y, rx, ry);
        s /= 2;
    }
    d
}

fn d2xy(n: u64, d: u64) -> (u64, u64) {
    let (mut x, mut y) = (0u64, 0u64);
    let mut t = d;
    let mut s = 1u64;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        rot(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x, y)
}

fn rot(n: u64, x: &mut u64, y: &mut u64, rx: u64, ry: u64) {
    if ry == 0 {
        if rx == 1 {
            *x = n - 1 - *x;
            *y = n - 1 - *y;
        }
        std::mem::swap(x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_maps_are_inverse() {
        for level in [1u32, 2, 3, 5] {
            let n = 1u64 << level;
            for d in 0..n * n {
                let (x, y) = d2xy(n, d);
                assert_eq!(xy2d(n, x, y), d);
            }
        }
    }

    #[test]
    fn endpoints() {
        let map = HilbertCurveMap::new(4, 1.0).unwrap();
        let h = map.cell_side();
        assert_eq!(map.curve_point(0.0).unwrap(), C64::new(-1.0 + h / 2.0, -1.0 + h / 2.0));
        assert_eq!(map.curve_point(1.0).unwrap(), C64::new(1.0 - h / 2.0, -1.0 + h / 2.0));
        assert!(map.curve_point(1.5).is_err());
        assert!(map.curve_point(-0.1).is_err());
    }

    #[test]
    fn edges_resolve_to_smaller_index() {
        let map = HilbertCurveMap::new(1, 1.0).unwrap();
        // Level-1 quadrant order: lower-left, upper-left, upper-right, lower-right.
        assert_eq!(map.cell_index(C64::new(-0.5, -0.5)).unwrap(), 0);
        assert_eq!(map.cell_index(C64::new(-0.5, 0.5)).unwrap(), 1);
        assert_eq!(map.cell_index(C64::new(0.5, 0.5)).unwrap(), 2);
        assert_eq!(map.cell_index(C64::new(0.5, -0.5)).unwrap(), 3);
        assert_eq!(map.cell_index(C64::new(0.0, 0.0)).unwrap(), 0);
        assert_eq!(map.cell_index(C64::new(0.0, 0.5)).unwrap(), 1);
        assert_eq!(map.cell_index(C64::new(0.5, 0.0)).unwrap(), 2);
        assert_eq!(map.cell_index(C64::new(1.0, 1.0)).unwrap(), 2);
        assert!(map.cell_index(C64::new(1.0 + 1e-12, 0.0)).is_err());
    }

    #[test]
    fn anchors_rotate_the_start_corner() {
        let base = HilbertCurveMap::new(3, 2.0).unwrap();
        let start = base.curve_point(0.0).unwrap();
        for k in 0..4u8 {
            let map = base.with_anchor(k);
            let rotated = map.curve_point(0.0).unwrap();
            let expected = start * C64::new(0.0, 1.0).powi(k as i32);
            assert!((rotated - expected).norm() < 1e-15);
            assert_eq!(map.cell_index(rotated).unwrap(), 0);
        }
    }

    #[test]
    fn full_level_indices_fit() {
        let map = HilbertCurveMap::new(32, 1.0).unwrap();
        let d = map.cell_index(C64::new(0.9999, -0.9999)).unwrap();
        assert!(d > u64::MAX - (1u64 << 40));
        assert_eq!(map.cell_index(C64::new(-1.0, -1.0)).unwrap(), 0);
    }
}
