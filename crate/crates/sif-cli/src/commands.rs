//! Implementations of the subcommands: each builds what it needs from
//! sif-core, writes its output files atomically, and returns the list of
//! files for the manifest.

use crate::csvio;
use crate::manifest::atomic_write;
use serde::Serialize;
use sif_core::decompose::{
    decompose, extract_imf_with, DecompositionConfig, RadiusRule, StopReason,
};
use sif_core::operator::{build_approx_op, build_exact_b, OperatorKind, SiftOperator};
use sif_core::spectrum::{
    eig_block_circulant, eig_dense, eig_symbol, spectrum_compare, SpectrumReport,
};
use sif_core::symbol::{counterexample_limit_m2, counterexample_scan};
use sif_core::synth::{error_curve, two_wave_preset, weighted_l2_error};
use sif_core::{FilterSpec, GridSpec, Result, SifError};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Grids above this size refuse the block-circulant eigensolver unless
/// forced: N solves of N x N complex eigenproblems stop being desk-scale.
const BLOCK_FORCE_THRESHOLD: usize = 400;

pub fn resolve_filter(grid: &GridSpec, radius: Option<f64>, m: Option<f64>) -> Result<FilterSpec> {
    match (radius, m) {
        (Some(r), None) => FilterSpec::from_radius(r),
        (None, Some(m)) => FilterSpec::pinned(m, grid),
        (Some(_), Some(_)) => Err(SifError::InvalidFilter(
            "--radius and --m are mutually exclusive".into(),
        )),
        (None, None) => Err(SifError::InvalidFilter(
            "one of --radius or --m is required".into(),
        )),
    }
}

pub fn grid_info(n: usize, out: Option<&Path>) -> Result<(String, Vec<PathBuf>)> {
    let grid = GridSpec::new(n)?;
    let areas: Vec<f64> = (1..=n).map(|j| grid.cell_area(j).unwrap()).collect();
    #[derive(Serialize)]
    struct GridInfo {
        n: usize,
        h: f64,
        total_area: f64,
        min_cell_area: f64,
        max_cell_area: f64,
        max_cell_diameter: f64,
    }
    let info = GridInfo {
        n,
        h: grid.h(),
        total_area: grid.total_area(),
        min_cell_area: areas.iter().cloned().fold(f64::INFINITY, f64::min),
        max_cell_area: areas.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        max_cell_diameter: grid.max_cell_diameter(),
    };
    let body = serde_json::to_string_pretty(&info).expect("serializable");
    let mut outputs = Vec::new();
    if let Some(path) = out {
        atomic_write(path, body.as_bytes())?;
        outputs.push(path.to_path_buf());
    }
    Ok((body, outputs))
}

#[allow(clippy::too_many_arguments)]
pub fn build_operator_cmd(
    n: usize,
    radius: Option<f64>,
    m: Option<f64>,
    kind: OperatorKind,
    quad: u32,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let grid = GridSpec::new(n)?;
    let filter = resolve_filter(&grid, radius, m)?;
    let op = match kind {
        OperatorKind::Exact => build_exact_b(&grid, &filter, quad)?,
        OperatorKind::Approx => build_approx_op(&grid, &filter)?,
    };
    op.serialize(out)?;
    Ok(vec![out.to_path_buf()])
}

pub enum SpectrumMethodArg {
    Dense,
    Block,
    Symbol,
}

#[allow(clippy::too_many_arguments)]
pub fn spectrum_cmd(
    n: usize,
    radius: Option<f64>,
    m: Option<f64>,
    kind: OperatorKind,
    method: SpectrumMethodArg,
    quad: u32,
    oversample: usize,
    force: bool,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let grid = GridSpec::new(n)?;
    let filter = resolve_filter(&grid, radius, m)?;
    let report: SpectrumReport = match method {
        SpectrumMethodArg::Symbol => eig_symbol(n, filter.cells_on(&grid), oversample)?,
        SpectrumMethodArg::Dense => {
            let op = assemble(&grid, &filter, kind, quad)?;
            eig_dense(&op, None)?
        }
        SpectrumMethodArg::Block => {
            if n > BLOCK_FORCE_THRESHOLD && !force {
                return Err(SifError::ResourceLimit(format!(
                    "block-circulant route at N={n} solves {n} dense {n}x{n} eigenproblems; \
                     pass --force to run it anyway or use --method symbol"
                )));
            }
            if n > BLOCK_FORCE_THRESHOLD {
                eprintln!(
                    "warning: forcing block-circulant eigensolve at N={n}; this may take a while"
                );
            }
            let op = assemble(&grid, &filter, kind, quad)?;
            eig_block_circulant(&op)?
        }
    };
    let provenance = format!(
        "method={} n={} radius={} quad={:?} elapsed_ms={}",
        report.method.name(),
        report.n,
        filter.radius(),
        report.quad_level,
        report.elapsed.as_millis()
    );
    csvio::write_eigenvalues(out, &report.eigenvalues, &provenance)?;
    Ok(vec![out.to_path_buf()])
}

fn assemble(
    grid: &GridSpec,
    filter: &FilterSpec,
    kind: OperatorKind,
    quad: u32,
) -> Result<SiftOperator> {
    match kind {
        OperatorKind::Exact => build_exact_b(grid, filter, quad),
        OperatorKind::Approx => build_approx_op(grid, filter),
    }
}

pub fn spectrum_compare_cmd(
    n: usize,
    radius: Option<f64>,
    m: Option<f64>,
    quad: u32,
    oversample: usize,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let grid = GridSpec::new(n)?;
    let filter = resolve_filter(&grid, radius, m)?;
    let cmp = spectrum_compare(&grid, &filter, quad, oversample)?;
    let provenance = format!("n={n} radius={} quad={quad}", filter.radius());
    csvio::write_compare(
        out,
        &cmp.exact_b_re,
        &cmp.op_re,
        &cmp.symbol_re,
        None,
        &provenance,
    )?;
    Ok(vec![out.to_path_buf()])
}

pub fn symbol_cmd(n: usize, m: f64, oversample: usize, out: &Path) -> Result<Vec<PathBuf>> {
    let report = eig_symbol(n, m, oversample)?;
    let provenance = format!("method=glt_symbol n={n} m={m} oversample={oversample}");
    csvio::write_eigenvalues(out, &report.eigenvalues, &provenance)?;
    Ok(vec![out.to_path_buf()])
}

pub fn counterexample_cmd(
    m: f64,
    points: usize,
    x2_max: f64,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    if !(0.0 < x2_max && x2_max < 1.0) {
        return Err(SifError::Parse(format!(
            "--x2-max must lie in (0, 1), got {x2_max}"
        )));
    }
    if points < 2 {
        return Err(SifError::Parse("--points must be at least 2".into()));
    }
    // descending log-spaced grid from x2_max down to 1e-4
    let lo = 1e-4f64;
    let xs: Vec<f64> = (0..points)
        .map(|k| {
            let frac = k as f64 / (points - 1) as f64;
            (x2_max.ln() + frac * (lo.ln() - x2_max.ln())).exp()
        })
        .collect();
    let rows = counterexample_scan(m, &xs);
    let mut body = String::new();
    use std::fmt::Write as _;
    writeln!(body, "# kappa(x2, (0, pi)) at m={m}").unwrap();
    if (m - 2.0).abs() < 1e-12 {
        writeln!(body, "# analytic_limit_x2_to_0={}", counterexample_limit_m2()).unwrap();
    }
    writeln!(body, "x2,kappa_real,negative").unwrap();
    for row in &rows {
        writeln!(body, "{},{},{}", row.x2, row.kappa_re, row.negative).unwrap();
    }
    atomic_write(out, body.as_bytes())?;
    Ok(vec![out.to_path_buf()])
}

pub fn synth_cmd(n: usize, preset: &str, out: &Path) -> Result<Vec<PathBuf>> {
    let grid = GridSpec::new(n)?;
    let signal = match preset {
        "two-wave" => two_wave_preset(&grid).0,
        other => {
            return Err(SifError::Parse(format!(
                "unknown preset {other:?}; available: two-wave"
            )))
        }
    };
    csvio::write_signal(out, &signal)?;
    Ok(vec![out.to_path_buf()])
}

#[derive(Serialize)]
struct ImfDiagnosticsOut {
    index: usize,
    iterations: usize,
    radius_radians: f64,
    stop_reason: String,
    final_ratio: f64,
}

#[derive(Serialize)]
struct DecomposeDiagnostics {
    n: usize,
    stabilized: bool,
    delta: f64,
    imf_count: usize,
    reconstruction_max_abs_error: f64,
    imfs: Vec<ImfDiagnosticsOut>,
}

fn stop_reason_str(r: StopReason) -> String {
    match r {
        StopReason::Converged => "converged".into(),
        StopReason::IterationCap => "iteration_cap".into(),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn decompose_cmd(
    input: &Path,
    n: usize,
    radius: Option<f64>,
    auto_chi: Option<f64>,
    naive: bool,
    delta: f64,
    max_iter: usize,
    max_imfs: usize,
    kind: OperatorKind,
    quad: u32,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    let signal = csvio::read_signal(input, Some(n))?;
    let radius_rule = match (radius, auto_chi) {
        (Some(r), None) => RadiusRule::Fixed(r),
        (None, Some(chi)) => RadiusRule::ExtremaScaled { chi },
        (None, None) => RadiusRule::ExtremaScaled { chi: 1.6 },
        (Some(_), Some(_)) => {
            return Err(SifError::InvalidFilter(
                "--radius and --auto-chi are mutually exclusive".into(),
            ))
        }
    };
    let cfg = DecompositionConfig {
        delta,
        max_inner_iterations: max_iter,
        max_imfs,
        radius_rule,
        stabilized: !naive,
        operator_kind: kind,
        quad_level: quad,
    };
    let result = decompose(&signal, &cfg)?;

    std::fs::create_dir_all(outdir)?;
    let mut outputs = Vec::new();
    for (idx, imf) in result.imfs.iter().enumerate() {
        let path = outdir.join(format!("imf_{}.csv", idx + 1));
        csvio::write_signal(&path, imf)?;
        outputs.push(path);
    }
    let rem_path = outdir.join("remainder.csv");
    csvio::write_signal(&rem_path, &result.remainder)?;
    outputs.push(rem_path);

    let mut total = result.remainder.clone();
    for imf in &result.imfs {
        total = total.add(imf)?;
    }
    let recon = total
        .values()
        .iter()
        .zip(signal.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let diag = DecomposeDiagnostics {
        n,
        stabilized: !naive,
        delta,
        imf_count: result.imfs.len(),
        reconstruction_max_abs_error: recon,
        imfs: result
            .diagnostics
            .iter()
            .enumerate()
            .map(|(idx, d)| ImfDiagnosticsOut {
                index: idx + 1,
                iterations: d.iterations,
                radius_radians: d.radius,
                stop_reason: stop_reason_str(d.stop_reason),
                final_ratio: d.final_ratio,
            })
            .collect(),
    };
    let diag_path = outdir.join("diagnostics.json");
    atomic_write(
        &diag_path,
        serde_json::to_string_pretty(&diag).expect("serializable").as_bytes(),
    )?;
    outputs.push(diag_path);
    Ok(outputs)
}

pub fn dif_cmd(
    input: &Path,
    delta: f64,
    max_iter: usize,
    max_imfs: usize,
    chi: f64,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    let signal = csvio::read_signal_1d(input)?;
    let cfg = sif_core::line_if::DifConfig {
        delta,
        max_inner_iterations: max_iter,
        max_imfs,
        chi,
    };
    let result = sif_core::line_if::dif_decompose(&signal, &cfg)?;
    std::fs::create_dir_all(outdir)?;
    let mut outputs = Vec::new();
    for (idx, imf) in result.imfs.iter().enumerate() {
        let path = outdir.join(format!("imf_{}.csv", idx + 1));
        csvio::write_signal_1d(&path, imf)?;
        outputs.push(path);
    }
    let rem_path = outdir.join("remainder.csv");
    csvio::write_signal_1d(&rem_path, &result.remainder)?;
    outputs.push(rem_path);

    #[derive(Serialize)]
    struct DifDiagnostics {
        n: usize,
        imf_count: usize,
        inner_iterations: Vec<usize>,
    }
    let diag_path = outdir.join("diagnostics.json");
    atomic_write(
        &diag_path,
        serde_json::to_string_pretty(&DifDiagnostics {
            n: signal.len(),
            imf_count: result.imfs.len(),
            inner_iterations: result.inner_iterations,
        })
        .expect("serializable")
        .as_bytes(),
    )?;
    outputs.push(diag_path);
    Ok(outputs)
}

pub fn test1_cmd(
    n: usize,
    radius: f64,
    quad: u32,
    oversample: usize,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    let grid = GridSpec::new(n)?;
    let filter = FilterSpec::from_radius(radius)?;
    let cmp = spectrum_compare(&grid, &filter, quad, oversample)?;
    std::fs::create_dir_all(outdir)?;
    let mut outputs = Vec::new();

    let prov = |route: &str| format!("route={route} n={n} radius={radius} quad={quad}");
    let files = [
        ("eigs_exact.csv", &cmp.exact_b_re, "exact_b_block_circulant"),
        ("eigs_op.csv", &cmp.op_re, "op_block_circulant"),
        ("eigs_symbol.csv", &cmp.symbol_re, "glt_symbol_quantiles"),
    ];
    for (name, values, route) in files {
        let path = outdir.join(name);
        csvio::write_real_column(&path, values, &prov(route))?;
        outputs.push(path);
    }
    let zoom_path = outdir.join("zoom.csv");
    csvio::write_compare(
        &zoom_path,
        &cmp.exact_b_re,
        &cmp.op_re,
        &cmp.symbol_re,
        Some(cmp.zoom_len()),
        &format!("lowest 20% of indices; n={n} radius={radius} quad={quad}"),
    )?;
    outputs.push(zoom_path);
    Ok(outputs)
}

pub fn test2_cmd(
    n: usize,
    radius: f64,
    delta: f64,
    iterations: usize,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    let grid = GridSpec::new(n)?;
    let (signal, truth_hi, _) = two_wave_preset(&grid);
    let filter = FilterSpec::from_radius(radius)?;
    let op = build_approx_op(&grid, &filter)?;
    std::fs::create_dir_all(outdir)?;
    let mut outputs = Vec::new();

    let sig_path = outdir.join("signal.csv");
    csvio::write_signal(&sig_path, &signal)?;
    outputs.push(sig_path);

    // stabilized extraction with the stopping criterion
    let cfg = DecompositionConfig {
        delta,
        max_inner_iterations: iterations,
        radius_rule: RadiusRule::Fixed(radius),
        stabilized: true,
        ..DecompositionConfig::default()
    };
    let (imf_sif, diag_sif) = extract_imf_with(&signal, &op, &cfg)?;
    let sif_path = outdir.join("imf1_sif.csv");
    csvio::write_signal(&sif_path, &imf_sif)?;
    outputs.push(sif_path);

    // naive run: the stopping criterion never fires, so keep the iterate
    // closest to the ground truth over the whole run for display
    let mut it = signal.clone();
    let mut best = it.clone();
    let mut best_err = f64::INFINITY;
    let mut naive_errs = Vec::with_capacity(iterations);
    let mut naive_converged_at = None;
    for p in 0..iterations {
        let next = op.sift(&it)?;
        let ratio = sif_core::decompose::stopping_ratio(&next, &it)?;
        it = next;
        let err = weighted_l2_error(&it, &truth_hi)?;
        naive_errs.push(err);
        if err < best_err {
            best_err = err;
            best = it.clone();
        }
        if naive_converged_at.is_none() && ratio <= delta {
            naive_converged_at = Some(p + 1);
        }
    }
    let naive_path = outdir.join("imf1_naive.csv");
    csvio::write_signal(&naive_path, &best)?;
    outputs.push(naive_path);

    for (name, imf) in [("err_map_sif.csv", &imf_sif), ("err_map_naive.csv", &best)] {
        let path = outdir.join(name);
        csvio::write_signal(&path, &sif_core::synth::error_map(imf, &truth_hi)?)?;
        outputs.push(path);
    }

    let sif_errs = error_curve(&signal, &truth_hi, &op, true, iterations)?;
    let curves_path = outdir.join("err_curves.csv");
    csvio::write_error_curves(&curves_path, &naive_errs, &sif_errs)?;
    outputs.push(curves_path);

    #[derive(Serialize)]
    struct Test2Diagnostics {
        n: usize,
        radius: f64,
        delta: f64,
        iterations: usize,
        sif_stop_reason: String,
        sif_iterations: usize,
        sif_final_ratio: f64,
        naive_converged_at: Option<usize>,
        naive_best_iteration_error: f64,
        initial_error: f64,
        naive_final_error: f64,
    }
    let diag = Test2Diagnostics {
        n,
        radius,
        delta,
        iterations,
        sif_stop_reason: stop_reason_str(diag_sif.stop_reason),
        sif_iterations: diag_sif.iterations,
        sif_final_ratio: diag_sif.final_ratio,
        naive_converged_at,
        naive_best_iteration_error: best_err,
        initial_error: weighted_l2_error(&signal, &truth_hi)?,
        naive_final_error: *naive_errs.last().unwrap_or(&f64::NAN),
    };
    let diag_path = outdir.join("diagnostics.json");
    atomic_write(
        &diag_path,
        serde_json::to_string_pretty(&diag).expect("serializable").as_bytes(),
    )?;
    outputs.push(diag_path);
    Ok(outputs)
}

pub fn default_test1_radius() -> f64 {
    PI / 10.0
}

pub fn default_test2_radius() -> f64 {
    PI / 20.0
}
