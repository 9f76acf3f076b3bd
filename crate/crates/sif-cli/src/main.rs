//! `sif`: build sifting operators on the lat-lon sphere grid, inspect
//! their spectra against the GLT symbol, and decompose spherical signals
//! into intrinsic mode functions.
//!
//! Exit codes: 0 success, 2 usage error, 3 resource limit, 4 numerical
//! failure, 1 anything else (I/O, corrupt files).

mod commands;
mod csvio;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::SpectrumMethodArg;
use manifest::ManifestBuilder;
use serde_json::json;
use sif_core::operator::OperatorKind;
use sif_core::SifError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sif", version, about = "Spherical iterative filtering laboratory")]
struct Cli {
    /// Worker threads for data-parallel sections (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Reserved for future stochastic features; recorded in manifests.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Exact,
    Approx,
}

impl From<KindArg> for OperatorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Exact => OperatorKind::Exact,
            KindArg::Approx => OperatorKind::Approx,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dense,
    Block,
    Symbol,
}

#[derive(Args)]
struct FilterArgs {
    /// Filter radius in radians (exclusive with --m).
    #[arg(long)]
    radius: Option<f64>,

    /// Filter radius in cells: R = m * h (exclusive with --radius).
    #[arg(long)]
    m: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print grid geometry (JSON): step, areas, diameters.
    GridInfo {
        #[arg(long)]
        n: usize,
        /// Also write the JSON to a file (adds a manifest).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Assemble a sifting operator and write the banded container file.
    BuildOperator {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Quadrature level for the exact operator.
        #[arg(long, default_value_t = 8)]
        quad: u32,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Eigenvalues of one operator by one route (CSV: index,re,im).
    Spectrum {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum, default_value = "approx")]
        kind: KindArg,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long, default_value_t = 8)]
        quad: u32,
        /// Lattice oversampling for the symbol route.
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        /// Allow the block-circulant route on very large grids.
        #[arg(long)]
        force: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Sorted real parts of exact B, Op and the symbol quantiles side by
    /// side (CSV: index,exactB_re,op_re,symbol_re).
    SpectrumCompare {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = 8)]
        quad: u32,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Symbol-quantile eigenvalue approximation (CSV: index,re,im).
    Symbol {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Scan kappa(x2, (0, pi)) toward the pole and flag the negative
    /// region (CSV: x2,kappa_real,negative).
    Counterexample {
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Largest x2 of the descending scan grid.
        #[arg(long, default_value_t = 0.5)]
        x2_max: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate a synthetic test signal (CSV: i,j,value).
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "two-wave")]
        preset: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decompose a spherical signal into intrinsic mode functions.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        /// Fixed filter radius in radians (exclusive with --auto-chi).
        #[arg(long)]
        radius: Option<f64>,
        /// Scale the radius from the extrema count with this chi.
        #[arg(long)]
        auto_chi: Option<f64>,
        /// Iterate the naive I - B map instead of the stabilized one.
        #[arg(long)]
        naive: bool,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 8)]
        max_imfs: usize,
        #[arg(long, value_enum, default_value = "approx")]
        kind: KindArg,
        #[arg(long, default_value_t = 8)]
        quad: u32,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// 1D reference decomposition on a periodic signal.
    Dif {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 8)]
        max_imfs: usize,
        #[arg(long, default_value_t = 1.6)]
        chi: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Spectrum comparison at the reference configuration
    /// (N=100, R=pi/10): three eigenvalue files plus the zoom slice.
    Test1 {
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Defaults to pi/10.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 8)]
        quad: u32,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Two-wave decomposition showdown at the reference configuration
    /// (N=100, R=pi/20): naive vs stabilized extraction with error maps
    /// and per-iteration error curves.
    Test2 {
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Defaults to pi/20.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = sif_core::configure_threads(cli.threads) {
            eprintln!("warning: could not configure {} threads: {e}", cli.threads);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &SifError) -> u8 {
    match err {
        SifError::InvalidGrid(_)
        | SifError::InvalidFilter(_)
        | SifError::IndexOutOfRange { .. }
        | SifError::GridMismatch { .. }
        | SifError::NoOscillation
        | SifError::DegenerateSignal
        | SifError::NonFiniteSignal
        | SifError::Parse(_) => 2,
        SifError::ResourceLimit(_) => 3,
        SifError::Numerical(_) => 4,
        SifError::Io(_)
        | SifError::BadMagic
        | SifError::UnsupportedVersion(_)
        | SifError::ChecksumMismatch
        | SifError::Truncated => 1,
    }
}

fn run(cli: Cli) -> sif_core::Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::GridInfo { n, out } => {
            let (body, outputs) = commands::grid_info(n, out.as_deref())?;
            println!("{body}");
            if let Some(path) = out {
                let mut mb = ManifestBuilder::new(
                    "grid-info",
                    json!({"n": n, "out": path.display().to_string(), "seed": seed}),
                );
                for o in &outputs {
                    mb.record(o);
                }
                mb.write(path.parent().unwrap_or_else(|| std::path::Path::new(".")))?;
            }
            Ok(())
        }
        Command::BuildOperator {
            n,
            filter,
            kind,
            quad,
            out,
        } => {
            let outputs =
                commands::build_operator_cmd(n, filter.radius, filter.m, kind.into(), quad, &out)?;
            finish_manifest(
                "build-operator",
                json!({
                    "n": n, "radius": filter.radius, "m": filter.m,
                    "kind": kind_name(kind), "quad": quad, "seed": seed,
                    "out": out.display().to_string(),
                }),
                &outputs,
            )
        }
        Command::Spectrum {
            n,
            filter,
            kind,
            method,
            quad,
            oversample,
            force,
            out,
        } => {
            let method_arg = match method {
                MethodArg::Dense => SpectrumMethodArg::Dense,
                MethodArg::Block => SpectrumMethodArg::Block,
                MethodArg::Symbol => SpectrumMethodArg::Symbol,
            };
            let outputs = commands::spectrum_cmd(
                n,
                filter.radius,
                filter.m,
                kind.into(),
                method_arg,
                quad,
                oversample,
                force,
                &out,
            )?;
            finish_manifest(
                "spectrum",
                json!({
                    "n": n, "radius": filter.radius, "m": filter.m,
                    "kind": kind_name(kind), "method": method_name(method),
                    "quad": quad, "oversample": oversample, "force": force,
                    "seed": seed, "out": out.display().to_string(),
                }),
                &outputs,
            )
        }
        Command::SpectrumCompare {
            n,
            filter,
            quad,
            oversample,
            out,
        } => {
            let outputs =
                commands::spectrum_compare_cmd(n, filter.radius, filter.m, quad, oversample, &out)?;
            finish_manifest(
                "spectrum-compare",
                json!({
                    "n": n, "radius": filter.radius, "m": filter.m,
                    "quad": quad, "oversample": oversample, "seed": seed,
                    "out": out.display().to_string(),
                }),
                &outputs,
            )
        }
        Command::Symbol {
            n,
            m,
            oversample,
            out,
        } => {
            let outputs = commands::symbol_cmd(n, m, oversample, &out)?;
            finish_manifest(
                "symbol",
                json!({"n": n, "m": m, "oversample": oversample, "seed": seed,
                       "out": out.display().to_string()}),
                &outputs,
            )
        }
        Command::Counterexample {
            m,
            points,
            x2_max,
            out,
        } => {
            let outputs = commands::counterexample_cmd(m, points, x2_max, &out)?;
            finish_manifest(
                "counterexample",
                json!({"m": m, "points": points, "x2_max": x2_max, "seed": seed,
                       "out": out.display().to_string()}),
                &outputs,
            )
        }
        Command::Synth { n, preset, out } => {
            let outputs = commands::synth_cmd(n, &preset, &out)?;
            finish_manifest(
                "synth",
                json!({"n": n, "preset": preset, "seed": seed,
                       "out": out.display().to_string()}),
                &outputs,
            )
        }
        Command::Decompose {
            input,
            n,
            radius,
            auto_chi,
            naive,
            delta,
            max_iter,
            max_imfs,
            kind,
            quad,
            out,
        } => {
            let outputs = commands::decompose_cmd(
                &input,
                n,
                radius,
                auto_chi,
                naive,
                delta,
                max_iter,
                max_imfs,
                kind.into(),
                quad,
                &out,
            )?;
            let mut mb = ManifestBuilder::new(
                "decompose",
                json!({
                    "input": input.display().to_string(), "n": n,
                    "radius": radius, "auto_chi": auto_chi, "naive": naive,
                    "delta": delta, "max_iter": max_iter, "max_imfs": max_imfs,
                    "kind": kind_name(kind), "quad": quad, "seed": seed,
                    "out": out.display().to_string(),
                }),
            );
            for o in &outputs {
                mb.record(o);
            }
            mb.write(&out)?;
            Ok(())
        }
        Command::Dif {
            input,
            delta,
            max_iter,
            max_imfs,
            chi,
            out,
        } => {
            let outputs = commands::dif_cmd(&input, delta, max_iter, max_imfs, chi, &out)?;
            let mut mb = ManifestBuilder::new(
                "dif",
                json!({
                    "input": input.display().to_string(), "delta": delta,
                    "max_iter": max_iter, "max_imfs": max_imfs, "chi": chi,
                    "seed": seed, "out": out.display().to_string(),
                }),
            );
            for o in &outputs {
                mb.record(o);
            }
            mb.write(&out)?;
            Ok(())
        }
        Command::Test1 {
            n,
            radius,
            quad,
            oversample,
            out,
        } => {
            let radius = radius.unwrap_or_else(commands::default_test1_radius);
            let outputs = commands::test1_cmd(n, radius, quad, oversample, &out)?;
            let mut mb = ManifestBuilder::new(
                "test1",
                json!({
                    "n": n, "radius": radius, "quad": quad,
                    "oversample": oversample, "seed": seed,
                    "out": out.display().to_string(),
                }),
            );
            for o in &outputs {
                mb.record(o);
            }
            mb.write(&out)?;
            Ok(())
        }
        Command::Test2 {
            n,
            radius,
            delta,
            iterations,
            out,
        } => {
            let radius = radius.unwrap_or_else(commands::default_test2_radius);
            let outputs = commands::test2_cmd(n, radius, delta, iterations, &out)?;
            let mut mb = ManifestBuilder::new(
                "test2",
                json!({
                    "n": n, "radius": radius, "delta": delta,
                    "iterations": iterations, "seed": seed,
                    "out": out.display().to_string(),
                }),
            );
            for o in &outputs {
                mb.record(o);
            }
            mb.write(&out)?;
            Ok(())
        }
    }
}

fn kind_name(k: KindArg) -> &'static str {
    match k {
        KindArg::Exact => "exact",
        KindArg::Approx => "approx",
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Dense => "dense",
        MethodArg::Block => "block",
        MethodArg::Symbol => "symbol",
    }
}

/// Writes a manifest next to a single-file output.
fn finish_manifest(
    command: &str,
    parameters: serde_json::Value,
    outputs: &[PathBuf],
) -> sif_core::Result<()> {
    let dir = outputs
        .first()
        .and_then(|p| p.parent().map(|d| d.to_path_buf()))
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or_else(|| PathBuf::from("."));
    let mut mb = ManifestBuilder::new(command, parameters);
    for o in outputs {
        mb.record(o);
    }
    mb.write(&dir)?;
    Ok(())
}
