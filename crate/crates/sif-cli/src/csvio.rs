//! CSV formats. All files are RFC-4180-style with '.' decimals, '\n' line
//! ends, a leading comment line for grid metadata where applicable, and a
//! header row naming the columns. Floats print in shortest round-trip
//! form, so identical runs produce byte-identical files.

use sif_core::ndarray;
use sif_core::num_complex;
use sif_core::{GridSpec, Result, SifError, SphericalSignal};
use std::fmt::Write as _;
use std::path::Path;

use crate::manifest::atomic_write;

/// Writes a spherical signal as `# N=<N>` plus `i,j,value` rows in
/// `(i, j)` lexicographic order.
pub fn write_signal(path: &Path, signal: &SphericalSignal) -> Result<()> {
    let n = signal.grid().n();
    let mut out = String::new();
    writeln!(out, "# N={n}").unwrap();
    writeln!(out, "i,j,value").unwrap();
    for i in 1..=n {
        for j in 1..=n {
            writeln!(out, "{i},{j},{}", signal.value_at(i, j)).unwrap();
        }
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Reads a signal written by `write_signal`. `expect_n`, when given, must
/// match the file header.
pub fn read_signal(path: &Path, expect_n: Option<usize>) -> Result<SphericalSignal> {
    let body = std::fs::read_to_string(path)?;
    let mut lines = body.lines();
    let header = lines
        .next()
        .ok_or_else(|| SifError::Parse("empty signal file".into()))?;
    let n: usize = header
        .trim()
        .strip_prefix("# N=")
        .ok_or_else(|| SifError::Parse(format!("expected '# N=<N>' header, got {header:?}")))?
        .parse()
        .map_err(|e| SifError::Parse(format!("bad N in header: {e}")))?;
    if let Some(expect) = expect_n {
        if expect != n {
            return Err(SifError::GridMismatch { lhs: expect, rhs: n });
        }
    }
    let grid = GridSpec::new(n)?;
    let mut values = ndarray::Array2::from_elem((n, n), f64::NAN);
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("i,") {
            continue;
        }
        let mut parts = line.split(',');
        let mut field = |what: &str| -> Result<&str> {
            parts
                .next()
                .ok_or_else(|| SifError::Parse(format!("missing {what} in row {line:?}")))
        };
        let i: usize = field("i")?
            .parse()
            .map_err(|e| SifError::Parse(format!("bad i: {e}")))?;
        let j: usize = field("j")?
            .parse()
            .map_err(|e| SifError::Parse(format!("bad j: {e}")))?;
        let v: f64 = field("value")?
            .parse()
            .map_err(|e| SifError::Parse(format!("bad value: {e}")))?;
        if i < 1 || i > n || j < 1 || j > n {
            return Err(SifError::Parse(format!("cell ({i},{j}) outside N={n}")));
        }
        values[[i - 1, j - 1]] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(SifError::Parse(format!(
            "signal file does not cover all {n}x{n} cells"
        )));
    }
    SphericalSignal::new(grid, values)
}

/// Writes complex eigenvalues as `index,re,im`, in the report's sort
/// order (real part ascending, imaginary tie-break).
pub fn write_eigenvalues(
    path: &Path,
    eigenvalues: &[num_complex::Complex64],
    provenance: &str,
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# sort=re_asc_im_tie {provenance}").unwrap();
    writeln!(out, "index,re,im").unwrap();
    for (idx, z) in eigenvalues.iter().enumerate() {
        writeln!(out, "{},{},{}", idx + 1, z.re, z.im).unwrap();
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Writes one sorted real-part column as `index,re`.
pub fn write_real_column(path: &Path, values: &[f64], provenance: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# sort=re_asc {provenance}").unwrap();
    writeln!(out, "index,re").unwrap();
    for (idx, v) in values.iter().enumerate() {
        writeln!(out, "{},{}", idx + 1, v).unwrap();
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Writes an aligned three-column comparison, optionally restricted to
/// the first `limit` indices.
pub fn write_compare(
    path: &Path,
    exact: &[f64],
    op: &[f64],
    symbol: &[f64],
    limit: Option<usize>,
    provenance: &str,
) -> Result<()> {
    let rows = limit.unwrap_or(exact.len()).min(exact.len());
    let mut out = String::new();
    writeln!(out, "# sort=re_asc {provenance}").unwrap();
    writeln!(out, "index,exactB_re,op_re,symbol_re").unwrap();
    for idx in 0..rows {
        writeln!(out, "{},{},{},{}", idx + 1, exact[idx], op[idx], symbol[idx]).unwrap();
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Writes per-iteration error curves as `iteration,err_naive,err_sif`.
pub fn write_error_curves(path: &Path, naive: &[f64], sif: &[f64]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# area-weighted L2 error vs ground truth per iteration").unwrap();
    writeln!(out, "iteration,err_naive,err_sif").unwrap();
    for (idx, (a, b)) in naive.iter().zip(sif).enumerate() {
        writeln!(out, "{},{},{}", idx + 1, a, b).unwrap();
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Writes a 1D signal as `# n=<n>` plus `i,value` rows (i is 1-based).
pub fn write_signal_1d(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# n={}", values.len()).unwrap();
    writeln!(out, "i,value").unwrap();
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, v).unwrap();
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Reads a 1D signal written by `write_signal_1d`.
pub fn read_signal_1d(path: &Path) -> Result<Vec<f64>> {
    let body = std::fs::read_to_string(path)?;
    let mut lines = body.lines();
    let header = lines
        .next()
        .ok_or_else(|| SifError::Parse("empty signal file".into()))?;
    let n: usize = header
        .trim()
        .strip_prefix("# n=")
        .ok_or_else(|| SifError::Parse(format!("expected '# n=<n>' header, got {header:?}")))?
        .parse()
        .map_err(|e| SifError::Parse(format!("bad n in header: {e}")))?;
    let mut values = vec![f64::NAN; n];
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("i,") {
            continue;
        }
        let mut parts = line.split(',');
        let i: usize = parts
            .next()
            .ok_or_else(|| SifError::Parse("missing index".into()))?
            .parse()
            .map_err(|e| SifError::Parse(format!("bad index: {e}")))?;
        let v: f64 = parts
            .next()
            .ok_or_else(|| SifError::Parse("missing value".into()))?
            .parse()
            .map_err(|e| SifError::Parse(format!("bad value: {e}")))?;
        if i < 1 || i > n {
            return Err(SifError::Parse(format!("index {i} outside n={n}")));
        }
        values[i - 1] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(SifError::Parse(format!("file does not cover all {n} samples")));
    }
    Ok(values)
}
