//! Truncated-cone filter on the sphere.
//!
//! `f_r(w) = 2 (R - d(r, w))^+ / (R - sin R)` integrates to exactly 1
//! against the normalized area measure for any center `r`, so the
//! associated moving average is a convex combination of signal values.

use crate::error::{Result, SifError};
use crate::grid::{arc_distance, GridPoint, GridSpec};
use std::f64::consts::PI;

/// Cone filter of radius `R` radians, optionally pinned to a grid as
/// `R = m * h` (the pin is bookkeeping: it records that the radius scales
/// with the mesh, the regime in which the operator family has a nonzero
/// spectral symbol).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    radius: f64,
    cells: Option<f64>,
}

impl FilterSpec {
    /// Filter with a fixed radius in radians. Requires `0 < R < pi` so the
    /// support is a proper cap.
    pub fn from_radius(radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 || radius >= PI {
            return Err(SifError::InvalidFilter(format!(
                "radius must lie in (0, pi), got {radius}"
            )));
        }
        Ok(Self {
            radius,
            cells: None,
        })
    }

    /// Filter with radius `m * h` cells on the given grid.
    pub fn pinned(m: f64, grid: &GridSpec) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(SifError::InvalidFilter(format!(
                "cell count must be positive, got {m}"
            )));
        }
        let mut spec = Self::from_radius(m * grid.h())?;
        spec.cells = Some(m);
        Ok(spec)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Radius in cells for the given grid: the pinned `m`, or `R / h`.
    pub fn cells_on(&self, grid: &GridSpec) -> f64 {
        self.cells.unwrap_or(self.radius / grid.h())
    }

    /// The pinned `m`, when the filter was constructed as `R = m * h`.
    pub fn pinned_cells(&self) -> Option<f64> {
        self.cells
    }

    /// Normalization constant `C = (R - sin R) / 2`.
    pub fn normalization(&self) -> f64 {
        (self.radius - self.radius.sin()) / 2.0
    }

    /// Filter value `2 (R - d(center, w))^+ / (R - sin R)`.
    pub fn value(&self, center: GridPoint, w: GridPoint) -> f64 {
        self.value_at_distance(arc_distance(center, w))
    }

    /// Filter profile as a function of arc distance.
    #[inline]
    pub fn value_at_distance(&self, d: f64) -> f64 {
        (self.radius - d).max(0.0) / self.normalization()
    }

    /// Numerically integrates the filter against the normalized measure
    /// `cos(phi) dtheta dphi / 4pi` with the center at the north pole,
    /// using a composite midpoint rule with `level` latitude subdivisions.
    ///
    /// The integrand is zonal, so the longitude integral is exact and the
    /// rule reduces to one midpoint sweep in latitude. Converges to 1 as
    /// `level` grows; the kink at `d = R` limits the order.
    pub fn verify_unit_mass(&self, level: usize) -> f64 {
        assert!(level >= 1, "quadrature level must be positive");
        let step = PI / level as f64;
        let mut mass = 0.0;
        for k in 0..level {
            let phi = -PI / 2.0 + (k as f64 + 0.5) * step;
            // distance from the north pole is pi/2 - phi
            let f = self.value_at_distance(PI / 2.0 - phi);
            mass += f * phi.cos();
        }
        // the theta integral contributes 2pi / 4pi = 1/2 exactly
        mass * step / 2.0
    }

    /// Support predicate for banded assembly: `false` guarantees
    /// `f_{z_{i,j}}(z_{i-t, j-s}) = 0`; `true` is conservative. Uses the
    /// bound `3 m^2 > s^2 + sin(jh) sin((j-s)h) min(|t|, N-|t|)^2`.
    pub fn support_overlap(&self, grid: &GridSpec, j: usize, t: i64, s: i64) -> bool {
        support_overlap_cells(self.cells_on(grid), grid, j, t, s)
    }
}

/// Same predicate with an explicit radius in cells; assembly uses an
/// inflated `m` to stay conservative for cell-pair integrals.
pub(crate) fn support_overlap_cells(m: f64, grid: &GridSpec, j: usize, t: i64, s: i64) -> bool {
    let n = grid.n() as i64;
    debug_assert!(j >= 1 && j as i64 <= n);
    debug_assert!(j as i64 - s >= 1 && j as i64 - s <= n);
    let h = grid.h();
    let t_wrap = (t.rem_euclid(n)).min(n - t.rem_euclid(n)) as f64;
    let sj = (j as f64 * h).sin();
    let sq = ((j as i64 - s) as f64 * h).sin();
    3.0 * m * m > (s * s) as f64 + sj * sq * t_wrap * t_wrap
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_degenerate_radius() {
        assert!(FilterSpec::from_radius(0.0).is_err());
        assert!(FilterSpec::from_radius(PI).is_err());
        assert!(FilterSpec::from_radius(-0.1).is_err());
        assert!(FilterSpec::from_radius(PI / 2.0).is_ok());
    }

    #[test]
    fn value_at_center_and_edge() {
        let f = FilterSpec::from_radius(PI / 2.0).unwrap();
        let c = GridPoint::new(1.0, 0.2).unwrap();
        // 2R/(R - sin R) at R = pi/2 is pi/(pi/2 - 1)
        assert_abs_diff_eq!(f.value(c, c), PI / (PI / 2.0 - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(f.value(c, c), 5.503876787768218, epsilon = 1e-9);
        // at distance exactly R the positive part vanishes
        assert_eq!(f.value_at_distance(PI / 2.0), 0.0);
        assert_eq!(f.value_at_distance(2.0), 0.0);
    }

    #[test]
    fn pinned_radius() {
        let g = GridSpec::new(100).unwrap();
        let f = FilterSpec::pinned(10.0, &g).unwrap();
        assert_abs_diff_eq!(f.radius(), PI / 10.0, epsilon = 1e-15);
        assert_eq!(f.pinned_cells(), Some(10.0));
        assert_abs_diff_eq!(f.cells_on(&g), 10.0);
    }

    #[test]
    fn unit_mass_converges() {
        for r in [PI / 10.0, PI / 2.0] {
            let f = FilterSpec::from_radius(r).unwrap();
            let m = f.verify_unit_mass(200_000);
            assert!((m - 1.0).abs() <= 1e-6, "R={r}: mass={m}");
        }
    }

    #[test]
    fn unit_mass_error_shrinks_with_level() {
        let f = FilterSpec::from_radius(PI / 10.0).unwrap();
        let errs: Vec<f64> = [500usize, 2_000, 8_000, 32_000]
            .iter()
            .map(|&l| (f.verify_unit_mass(l) - 1.0).abs())
            .collect();
        // at least first-order decay per 4x refinement, with slack for the
        // kink drifting across midpoints
        for w in errs.windows(2) {
            assert!(w[1] < w[0] / 2.0, "errors not decaying: {errs:?}");
        }
    }

    #[test]
    fn symmetry_in_arguments() {
        let f = FilterSpec::from_radius(0.7).unwrap();
        let a = GridPoint::new(0.3, 0.4).unwrap();
        let b = GridPoint::new(0.8, 0.1).unwrap();
        assert_eq!(f.value(a, b), f.value(b, a));
    }

    #[test]
    fn monotone_in_distance() {
        let f = FilterSpec::from_radius(1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let v = f.value_at_distance(k as f64 * 0.05);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn support_excludes_wide_latitude_offsets() {
        let g = GridSpec::new(64).unwrap();
        let f = FilterSpec::pinned(2.0, &g).unwrap();
        let m = 2.0f64;
        let s = (3.0f64.sqrt() * m).ceil() as i64; // |s| >= sqrt(3) m
        let j = 32usize;
        assert!(!f.support_overlap(&g, j, 0, s));
        // a point always overlaps its own support
        assert!(f.support_overlap(&g, j, 0, 0));
    }

    #[test]
    fn support_excludes_far_longitudes_at_equator() {
        let g = GridSpec::new(64).unwrap();
        let f = FilterSpec::pinned(2.0, &g).unwrap();
        // sin^2(jh) ~ 1 at the equator: need min(|t|, N-|t|)^2 >= 12
        let j = 32usize;
        assert!(!f.support_overlap(&g, j, 4, 0));
        assert!(f.support_overlap(&g, j, 1, 0));
    }
}
