//! Equiangular latitude-longitude discretization of the unit sphere.
//!
//! The grid has `N * N` cells: longitude is split into `N` arcs of width
//! `2h` and latitude into `N` arcs of width `h`, with `h = pi / N`. Cell
//! `(i, j)` (both 1-based) covers
//! `[2(i-1)h, 2ih] x [-pi/2 + (j-1)h, -pi/2 + jh]` and its center is
//! `((2i-1)h, -pi/2 + (j-1/2)h)`. The poles are never grid points. Areas
//! are normalized so the whole sphere has measure 1.

use crate::error::{Result, SifError};
use std::f64::consts::PI;

/// A point on the unit sphere in spherical coordinates.
///
/// `theta` is longitude in `[0, 2*pi)`, `phi` is latitude in
/// `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
}

impl GridPoint {
    /// Builds a point, reducing `theta` into `[0, 2*pi)`.
    ///
    /// Fails if `phi` lies outside `[-pi/2, pi/2]` or either coordinate is
    /// non-finite.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(SifError::InvalidGrid("non-finite coordinates".into()));
        }
        if !(-PI / 2.0..=PI / 2.0).contains(&phi) {
            return Err(SifError::InvalidGrid(format!(
                "latitude {phi} outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self {
            theta: theta.rem_euclid(2.0 * PI),
            phi,
        })
    }
}

/// One grid cell, with its 1-based indices and coordinate ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub theta_range: (f64, f64),
    pub phi_range: (f64, f64),
}

impl Cell {
    /// The two opposite corners realizing the cell diameter.
    pub fn corners(&self) -> (GridPoint, GridPoint) {
        (
            GridPoint {
                theta: self.theta_range.0,
                phi: self.phi_range.0,
            },
            GridPoint {
                theta: self.theta_range.1,
                phi: self.phi_range.1,
            },
        )
    }
}

/// The `N x N` equiangular grid. Immutable and cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    h: f64,
}

impl GridSpec {
    /// Builds the grid with `n` points per axis. Requires `n >= 2`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(SifError::InvalidGrid(format!(
                "need at least 2 points per axis, got {n}"
            )));
        }
        Ok(Self {
            n,
            h: PI / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Latitude step `h = pi / N`; the longitude step is `2h`.
    pub fn h(&self) -> f64 {
        self.h
    }

    fn check_j(&self, j: usize) -> Result<()> {
        if j < 1 || j > self.n {
            return Err(SifError::IndexOutOfRange {
                what: "latitude",
                index: j as i64,
                bound: self.n,
            });
        }
        Ok(())
    }

    /// Center of cell `(i, j)`, 1-based: `((2i-1)h, -pi/2 + (j-1/2)h)`.
    pub fn center(&self, i: usize, j: usize) -> GridPoint {
        debug_assert!((1..=self.n).contains(&i) && (1..=self.n).contains(&j));
        GridPoint {
            theta: (2 * i - 1) as f64 * self.h,
            phi: -PI / 2.0 + (j as f64 - 0.5) * self.h,
        }
    }

    /// Cell `(i, j)` with its coordinate ranges.
    pub fn cell(&self, i: usize, j: usize) -> Result<Cell> {
        if i < 1 || i > self.n {
            return Err(SifError::IndexOutOfRange {
                what: "longitude",
                index: i as i64,
                bound: self.n,
            });
        }
        self.check_j(j)?;
        Ok(Cell {
            i,
            j,
            theta_range: (2.0 * (i - 1) as f64 * self.h, 2.0 * i as f64 * self.h),
            phi_range: (
                -PI / 2.0 + (j - 1) as f64 * self.h,
                -PI / 2.0 + j as f64 * self.h,
            ),
        })
    }

    /// Iterates all cell centers in `(i, j)` lexicographic order.
    pub fn centers(&self) -> impl Iterator<Item = ((usize, usize), GridPoint)> + '_ {
        let n = self.n;
        (1..=n).flat_map(move |i| (1..=n).map(move |j| ((i, j), self.center(i, j))))
    }

    /// Normalized area of any cell in latitude row `j` (independent of the
    /// longitude index): `(h / 2pi) * (cos((j-1)h) - cos(jh))`.
    pub fn cell_area(&self, j: usize) -> Result<f64> {
        self.check_j(j)?;
        Ok(self.cell_area_unchecked(j))
    }

    #[inline]
    pub(crate) fn cell_area_unchecked(&self, j: usize) -> f64 {
        let h = self.h;
        h / (2.0 * PI) * (((j - 1) as f64 * h).cos() - (j as f64 * h).cos())
    }

    /// Leading-order area `h^2 sin(jh) / (2pi)`; the exact value differs by
    /// `O(h^3)`.
    pub fn cell_area_leading(&self, j: usize) -> Result<f64> {
        self.check_j(j)?;
        let h = self.h;
        Ok(h * h / (2.0 * PI) * (j as f64 * h).sin())
    }

    /// Sum of all cell areas; telescopes to 1 exactly up to rounding.
    pub fn total_area(&self) -> f64 {
        (1..=self.n)
            .map(|j| self.cell_area_unchecked(j) * self.n as f64)
            .sum()
    }

    /// Leading-order distance between centers `z_{i,j}` and
    /// `z_{i-t, j-s}`: `h * sqrt(s^2 + 4 t^2 sin^2(jh))`.
    pub fn approx_distance(&self, j: usize, t: i64, s: i64) -> f64 {
        let h = self.h;
        let sj = (j as f64 * h).sin();
        h * ((s * s) as f64 + 4.0 * (t * t) as f64 * sj * sj).sqrt()
    }

    /// Exact diameter of a row-`j` cell: the arc distance between opposite
    /// corners.
    pub fn cell_diameter(&self, j: usize) -> Result<f64> {
        let cell = self.cell(1, j)?;
        let (v, u) = cell.corners();
        Ok(arc_distance(v, u))
    }

    /// Leading-order diameter `h * sqrt(1 + 4 sin^2(jh))`; exact differs by
    /// `O(h^2)`.
    pub fn cell_diameter_leading(&self, j: usize) -> Result<f64> {
        self.check_j(j)?;
        let h = self.h;
        let sj = (j as f64 * h).sin();
        Ok(h * (1.0 + 4.0 * sj * sj).sqrt())
    }

    /// Largest cell diameter over all latitude rows.
    pub fn max_cell_diameter(&self) -> f64 {
        (1..=self.n)
            .map(|j| self.cell_diameter(j).expect("j in range"))
            .fold(0.0, f64::max)
    }
}

/// Great-circle distance between two points, in `[0, pi]`.
///
/// The longitude difference is reduced modulo `2pi` and the arccos argument
/// is clamped to `[-1, 1]`; dot products of nearly coincident points can
/// exceed 1 by a few ulps and would otherwise produce NaN.
pub fn arc_distance(p: GridPoint, q: GridPoint) -> f64 {
    // |dtheta| keeps the reduction bitwise symmetric in the arguments
    let dtheta = (p.theta - q.theta).abs().rem_euclid(2.0 * PI);
    if dtheta == 0.0 && p.phi == q.phi {
        // sin^2 + cos^2 rounds below 1 and arccos would leave ~1e-8
        return 0.0;
    }
    let c = p.phi.sin() * q.phi.sin() + p.phi.cos() * q.phi.cos() * dtheta.cos();
    c.clamp(-1.0, 1.0).acos()
}
