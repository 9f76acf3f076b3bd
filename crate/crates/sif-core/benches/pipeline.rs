//! Criterion suite over the hot paths: operator assembly, sifting
//! matvecs, block-circulant spectra and symbol quantiles.
//!
//! Each benchmark id carries the execution mode, so the rayon build and
//! the sequential fallback can be compared directly:
//!
//! ```text
//! cargo bench -p sif-core                          # parallel
//! cargo bench -p sif-core --no-default-features    # sequential
//! ```

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sif_core::decompose::{extract_imf_with, DecompositionConfig, RadiusRule};
use sif_core::operator::{build_approx_op, build_exact_b};
use sif_core::spectrum::eig_block_circulant;
use sif_core::symbol::symbol_eig_approx;
use sif_core::synth::two_wave_preset;
use sif_core::{FilterSpec, GridSpec};
use std::f64::consts::PI;

fn mode() -> &'static str {
    if sif_core::parallel_enabled() {
        "parallel"
    } else {
        "sequential"
    }
}

fn bench_assemble_approx(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_approx");
    for n in [32usize, 64, 128] {
        let grid = GridSpec::new(n).unwrap();
        let filter = FilterSpec::pinned(5.0, &grid).unwrap();
        group.bench_with_input(
            BenchmarkId::new(mode(), n),
            &(grid, filter),
            |b, (grid, filter)| b.iter(|| black_box(build_approx_op(grid, filter).unwrap())),
        );
    }
    group.finish();
}

fn bench_assemble_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_exact_q4");
    group.sample_size(10);
    for n in [16usize, 32] {
        let grid = GridSpec::new(n).unwrap();
        let filter = FilterSpec::from_radius(PI / 10.0).unwrap();
        group.bench_with_input(
            BenchmarkId::new(mode(), n),
            &(grid, filter),
            |b, (grid, filter)| b.iter(|| black_box(build_exact_b(grid, filter, 4).unwrap())),
        );
    }
    group.finish();
}

fn bench_sift_stabilized(c: &mut Criterion) {
    let mut group = c.benchmark_group("sift_stabilized_step");
    for n in [64usize, 128] {
        let grid = GridSpec::new(n).unwrap();
        let filter = FilterSpec::from_radius(PI / 20.0).unwrap();
        let op = build_approx_op(&grid, &filter).unwrap();
        let (signal, _, _) = two_wave_preset(&grid);
        group.bench_with_input(
            BenchmarkId::new(mode(), n),
            &(op, signal),
            |b, (op, signal)| b.iter(|| black_box(op.sift_stabilized(signal).unwrap())),
        );
    }
    group.finish();
}

fn bench_block_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_circulant_spectrum");
    group.sample_size(10);
    for n in [32usize, 64] {
        let grid = GridSpec::new(n).unwrap();
        let filter = FilterSpec::pinned(5.0, &grid).unwrap();
        let op = build_approx_op(&grid, &filter).unwrap();
        group.bench_with_input(BenchmarkId::new(mode(), n), &op, |b, op| {
            b.iter(|| black_box(eig_block_circulant(op).unwrap()))
        });
    }
    group.finish();
}

fn bench_symbol_quantiles(c: &mut Criterion) {
    let mut group = c.benchmark_group("symbol_quantiles");
    group.sample_size(10);
    for n in [64usize, 128] {
        group.bench_with_input(BenchmarkId::new(mode(), n), &n, |b, &n| {
            b.iter(|| black_box(symbol_eig_approx(n, 10.0, 4)))
        });
    }
    group.finish();
}

fn bench_imf_extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extract_imf_two_wave");
    group.sample_size(10);
    let n = 64usize;
    let grid = GridSpec::new(n).unwrap();
    let filter = FilterSpec::from_radius(PI / 20.0).unwrap();
    let op = build_approx_op(&grid, &filter).unwrap();
    let (signal, _, _) = two_wave_preset(&grid);
    let cfg = DecompositionConfig {
        radius_rule: RadiusRule::Fixed(PI / 20.0),
        ..DecompositionConfig::default()
    };
    group.bench_function(BenchmarkId::new(mode(), n), |b| {
        b.iter(|| black_box(extract_imf_with(&signal, &op, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_assemble_approx,
    bench_assemble_exact,
    bench_sift_stabilized,
    bench_block_spectrum,
    bench_symbol_quantiles,
    bench_imf_extraction
);
criterion_main!(benches);
