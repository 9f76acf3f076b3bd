//! Signals sampled on the grid cells, with area-weighted norms.

use crate::error::{Result, SifError};
use crate::grid::GridSpec;
use ndarray::Array2;

/// An `N x N` real sample array; entry `(i-1, j-1)` is the signal value at
/// the center of cell `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSignal {
    grid: GridSpec,
    values: Array2<f64>,
}

impl SphericalSignal {
    /// Wraps a sample array. Fails on shape mismatch or non-finite values.
    pub fn new(grid: GridSpec, values: Array2<f64>) -> Result<Self> {
        let n = grid.n();
        if values.shape() != [n, n] {
            return Err(SifError::GridMismatch {
                lhs: n,
                rhs: values.shape()[0],
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SifError::NonFiniteSignal);
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.n();
        Self {
            grid,
            values: Array2::zeros((n, n)),
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        let n = grid.n();
        Self {
            grid,
            values: Array2::from_elem((n, n), c),
        }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: GridSpec, f: impl Fn(crate::grid::GridPoint) -> f64) -> Self {
        let n = grid.n();
        let values = Array2::from_shape_fn((n, n), |(i0, j0)| f(grid.center(i0 + 1, j0 + 1)));
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Value at cell `(i, j)`, 1-based.
    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[[i - 1, j - 1]]
    }

    /// Area-weighted L2 norm `sqrt(sum sigma(S_ij) g_ij^2)`.
    pub fn weighted_norm(&self) -> f64 {
        let n = self.grid.n();
        let areas: Vec<f64> = (1..=n).map(|j| self.grid.cell_area_unchecked(j)).collect();
        let mut acc = 0.0;
        for i0 in 0..n {
            let row = self.values.row(i0);
            for (j0, v) in row.iter().enumerate() {
                acc += areas[j0] * v * v;
            }
        }
        acc.sqrt()
    }

    /// Elementwise difference; grids must match.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values - &other.values,
        })
    }

    /// Elementwise sum; grids must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values + &other.values,
        })
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.n() != other.grid.n() {
            return Err(SifError::GridMismatch {
                lhs: self.grid.n(),
                rhs: other.grid.n(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Array2<f64>) -> Self {
        Self { grid, values }
    }
}
