//! Eigenvalue computations for the assembled operators, by three routes:
//! dense (oracle, small grids), block-circulant longitude-DFT
//! factorization (the workhorse), and GLT symbol quantiles.
//!
//! Longitude invariance factors the `N^2 x N^2` operator into `N`
//! independent latitude blocks: for frequency `k`,
//! `H_k[j, q] = sum_t band(t, j - q)[j] * exp(-2 pi i t k / N)`,
//! and the operator spectrum is the union of the block spectra.

use crate::eig;
use crate::error::{Result, SifError};
use crate::filter::FilterSpec;
use crate::grid::GridSpec;
use crate::operator::{build_approx_op, build_exact_b, OperatorKind, SiftOperator};
use crate::par;
use crate::symbol;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

/// Default cap on `N` for dense `N^2 x N^2` eigenproblems.
pub const DEFAULT_DENSE_CAP: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Dense,
    BlockCirculant,
    GltSymbol,
}

impl SpectrumMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SpectrumMethod::Dense => "dense",
            SpectrumMethod::BlockCirculant => "block_circulant",
            SpectrumMethod::GltSymbol => "glt_symbol",
        }
    }
}

/// Sorted eigenvalues plus the provenance needed to reproduce them.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub method: SpectrumMethod,
    pub n: usize,
    pub radius: Option<f64>,
    pub cells: Option<f64>,
    pub quad_level: Option<u32>,
    /// Sorted by real part ascending, imaginary part as tie-break.
    pub eigenvalues: Vec<Complex64>,
    pub elapsed: Duration,
}

impl SpectrumReport {
    pub fn min_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sorted_real_parts(&self) -> Vec<f64> {
        let mut re: Vec<f64> = self.eigenvalues.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        re
    }
}

fn report(
    method: SpectrumMethod,
    op: &SiftOperator,
    mut ev: Vec<Complex64>,
    started: Instant,
) -> SpectrumReport {
    eig::sort_spectrum(&mut ev);
    SpectrumReport {
        method,
        n: op.grid().n(),
        radius: Some(op.filter().radius()),
        cells: op.filter().pinned_cells(),
        quad_level: op.quad_level(),
        eigenvalues: ev,
        elapsed: started.elapsed(),
    }
}

/// All `N^2` eigenvalues via dense materialization. Oracle route; capped.
pub fn eig_dense(op: &SiftOperator, cap: Option<usize>) -> Result<SpectrumReport> {
    let started = Instant::now();
    let dense = op.to_dense(cap.unwrap_or(DEFAULT_DENSE_CAP))?;
    let ev = eig::eigenvalues_real(dense.view())?;
    Ok(report(SpectrumMethod::Dense, op, ev, started))
}

/// All `N^2` eigenvalues as the union of the `N` latitude-block spectra.
///
/// Blocks come in conjugate pairs (`H_{N-k} = conj(H_k)`), but each block
/// is solved directly; the merge is deterministic.
pub fn eig_block_circulant(op: &SiftOperator) -> Result<SpectrumReport> {
    let started = Instant::now();
    let n = op.grid().n();
    let blocks: Vec<Result<Vec<Complex64>>> = par::map_range(n, |k| {
        let h = latitude_block(op, k);
        eig::eigenvalues_complex(&h)
    });
    let mut ev = Vec::with_capacity(n * n);
    for b in blocks {
        ev.extend(b?);
    }
    Ok(report(SpectrumMethod::BlockCirculant, op, ev, started))
}

/// The `N x N` latitude block at longitude frequency `k`.
pub fn latitude_block(op: &SiftOperator, k: usize) -> faer::Mat<faer::c64> {
    let n = op.grid().n();
    let mut h = faer::Mat::<faer::c64>::zeros(n, n);
    let omega = -2.0 * PI * k as f64 / n as f64;
    for band in op.bands() {
        let phase = faer::c64::new(
            (omega * band.t() as f64).cos(),
            (omega * band.t() as f64).sin(),
        );
        let s = band.s() as i64;
        for (j0, &v) in band.values().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let q0 = j0 as i64 - s;
            if (0..n as i64).contains(&q0) {
                h[(j0, q0 as usize)] += phase * v;
            }
        }
    }
    h
}

/// Sorted real parts of the three approximation routes side by side, for
/// the spectrum-comparison plots.
#[derive(Debug, Clone)]
pub struct SpectrumComparison {
    pub n: usize,
    pub radius: f64,
    pub quad_level: u32,
    pub exact_b_re: Vec<f64>,
    pub op_re: Vec<f64>,
    pub symbol_re: Vec<f64>,
}

impl SpectrumComparison {
    /// Number of leading (lowest) indices forming the zoom slice: 20% of
    /// the spectrum, at least 1.
    pub fn zoom_len(&self) -> usize {
        (self.n * self.n / 5).max(1)
    }
}

/// Computes sorted real parts for exact `B`, `Op` and the symbol quantiles
/// on one grid/filter, using the block-circulant route for the matrices.
pub fn spectrum_compare(
    grid: &GridSpec,
    filter: &FilterSpec,
    quad_level: u32,
    oversample: usize,
) -> Result<SpectrumComparison> {
    let b = build_exact_b(grid, filter, quad_level)?;
    let exact_b_re = eig_block_circulant(&b)?.sorted_real_parts();
    drop(b);
    let op = build_approx_op(grid, filter)?;
    let op_re = eig_block_circulant(&op)?.sorted_real_parts();
    drop(op);
    let m = filter.cells_on(grid);
    let mut symbol_re: Vec<f64> = symbol::symbol_eig_approx(grid.n(), m, oversample)
        .into_iter()
        .map(|z| z.re)
        .collect();
    symbol_re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SpectrumComparison {
        n: grid.n(),
        radius: filter.radius(),
        quad_level,
        exact_b_re,
        op_re,
        symbol_re,
    })
}

/// Symbol-quantile eigenvalue approximation packaged as a report.
pub fn eig_symbol(n: usize, m: f64, oversample: usize) -> Result<SpectrumReport> {
    if n < 2 {
        return Err(SifError::InvalidGrid(format!("N must be >= 2, got {n}")));
    }
    let started = Instant::now();
    let mut ev = symbol::symbol_eig_approx(n, m, oversample);
    eig::sort_spectrum(&mut ev);
    Ok(SpectrumReport {
        method: SpectrumMethod::GltSymbol,
        n,
        radius: None,
        cells: Some(m),
        quad_level: None,
        eigenvalues: ev,
        elapsed: started.elapsed(),
    })
}

/// One row of the fixed-radius zero-distribution table.
#[derive(Debug, Clone)]
pub struct ZeroDistributionRow {
    pub n: usize,
    pub frobenius_sq: f64,
    /// `(epsilon, #{|lambda| > epsilon})`
    pub counts: Vec<(f64, usize)>,
}

/// For a radius held fixed while `N` grows, `Op` is zero-distributed: its
/// Frobenius norm stays `O(1)` and the eigenvalues cluster at zero. This
/// tabulates both effects.
pub fn zero_distribution_check(
    radius: f64,
    n_list: &[usize],
    epsilons: &[f64],
) -> Result<Vec<ZeroDistributionRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let grid = GridSpec::new(n)?;
        let filter = FilterSpec::from_radius(radius)?;
        let op = build_approx_op(&grid, &filter)?;
        let frob = op.frobenius_sq();
        let spec = eig_block_circulant(&op)?;
        let counts = epsilons
            .iter()
            .map(|&eps| {
                (
                    eps,
                    spec.eigenvalues.iter().filter(|z| z.norm() > eps).count(),
                )
            })
            .collect();
        rows.push(ZeroDistributionRow {
            n,
            frobenius_sq: frob,
            counts,
        });
    }
    Ok(rows)
}

/// Builds the requested operator kind (helper shared with the CLI).
pub fn build_operator(
    grid: &GridSpec,
    filter: &FilterSpec,
    kind: OperatorKind,
    quad_level: u32,
) -> Result<SiftOperator> {
    match kind {
        OperatorKind::Exact => build_exact_b(grid, filter, quad_level),
        OperatorKind::Approx => build_approx_op(grid, filter),
    }
}

/// Eigenvalues of an arbitrary dense real matrix (general, nonsymmetric),
/// sorted by the report convention. Exposed for spectral checks on matrix
/// products such as `Op^T Op` that are not banded operators themselves.
pub fn eigenvalues_dense_matrix(a: ndarray::ArrayView2<'_, f64>) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(SifError::Numerical(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut ev = eig::eigenvalues_real(a)?;
    eig::sort_spectrum(&mut ev);
    Ok(ev)
}

/// Sup distance between the empirical CDFs of two samples.
pub fn cdf_sup_gap(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let cdf = |sorted: &[f64], x: f64| -> f64 {
        sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
    };
    let mut gap = 0.0f64;
    for &x in sa.iter().chain(sb.iter()) {
        gap = gap.max((cdf(&sa, x) - cdf(&sb, x)).abs());
    }
    gap
}
