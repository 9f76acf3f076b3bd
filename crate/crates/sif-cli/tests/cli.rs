//! End-to-end runs of the `sif` binary on tiny grids.

use std::path::Path;
use std::process::Command;

fn sif() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sif"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

#[test]
fn grid_info_prints_json() {
    let out = sif().args(["grid-info", "--n", "4"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 4);
    assert!((v["total_area"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["max_cell_diameter"].as_f64().unwrap() > 0.0);
}

#[test]
fn grid_info_rejects_degenerate_grid_with_usage_code() {
    let out = sif().args(["grid-info", "--n", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_operator_roundtrips_and_manifest_checks_out() {
    let dir = tempfile::tempdir().unwrap();
    let op_path = dir.path().join("op.sifop");
    let out = sif()
        .args([
            "build-operator",
            "--n",
            "10",
            "--m",
            "2.0",
            "--kind",
            "exact",
            "--quad",
            "3",
            "-o",
        ])
        .arg(&op_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let op = sif_core::SiftOperator::deserialize(&op_path).unwrap();
    assert_eq!(op.grid().n(), 10);
    assert_eq!(op.kind(), sif_core::OperatorKind::Exact);

    // manifest written next to the output, checksums match the file
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "build-operator");
    let rec = &manifest["outputs"][0];
    assert_eq!(rec["path"], "op.sifop");
    let bytes = std::fs::read(&op_path).unwrap();
    assert_eq!(rec["bytes"].as_u64().unwrap(), bytes.len() as u64);
}

#[test]
fn radius_and_m_are_mutually_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let out = sif()
        .args([
            "build-operator",
            "--n",
            "8",
            "--radius",
            "0.3",
            "--m",
            "2.0",
            "--kind",
            "approx",
            "-o",
        ])
        .arg(dir.path().join("x.sifop"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_radius_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sif()
        .args([
            "build-operator",
            "--n",
            "8",
            "--radius",
            "1.6",
            "--kind",
            "approx",
            "-o",
        ])
        .arg(dir.path().join("x.sifop"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_block_and_dense_agree_in_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut values = Vec::new();
    for method in ["block", "dense"] {
        let path = dir.path().join(format!("{method}.csv"));
        let out = sif()
            .args([
                "spectrum", "--n", "8", "--m", "2.0", "--kind", "approx", "--method", method,
                "-o",
            ])
            .arg(&path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let body = read(&path);
        let re: Vec<f64> = body
            .lines()
            .skip(2)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(re.len(), 64);
        values.push(re);
    }
    for (a, b) in values[0].iter().zip(&values[1]) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn spectrum_dense_over_cap_is_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sif()
        .args([
            "spectrum", "--n", "64", "--m", "2.0", "--method", "dense", "-o",
        ])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn synth_then_decompose_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("signal.csv");
    let out = sif()
        .args(["synth", "--n", "24", "--preset", "two-wave", "-o"])
        .arg(&sig)
        .output()
        .unwrap();
    assert!(out.status.success());

    let outdir = dir.path().join("dec");
    let out = sif()
        .args([
            "decompose",
            "--input",
        ])
        .arg(&sig)
        .args([
            "--n", "24", "--radius", "0.6", "--max-imfs", "2", "--max-iter", "40", "-o",
        ])
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(outdir.join("imf_1.csv").exists());
    assert!(outdir.join("remainder.csv").exists());
    let diag: serde_json::Value = serde_json::from_str(&read(&outdir.join("diagnostics.json"))).unwrap();
    assert!(diag["reconstruction_max_abs_error"].as_f64().unwrap() <= 1e-12);
    assert!(outdir.join("manifest.json").exists());
}

#[test]
fn decompose_rejects_mismatched_n() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("signal.csv");
    sif()
        .args(["synth", "--n", "16", "-o"])
        .arg(&sig)
        .output()
        .unwrap();
    let out = sif()
        .args(["decompose", "--input"])
        .arg(&sig)
        .args(["--n", "24", "--radius", "0.5", "-o"])
        .arg(dir.path().join("dec"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn counterexample_scan_flags_negative_region() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = sif()
        .args(["counterexample", "--points", "50", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let body = read(&path);
    assert!(body.starts_with("# kappa"));
    assert!(body.contains("# analytic_limit_x2_to_0="));
    // the tail of the scan (smallest x2) must be negative
    let last = body.lines().last().unwrap();
    assert!(last.ends_with("true"), "last row: {last}");
}

#[test]
fn dif_decomposes_periodic_signal() {
    let dir = tempfile::tempdir().unwrap();
    let sig_path = dir.path().join("sig.csv");
    let n = 128usize;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (2.0 * std::f64::consts::PI * 24.0 * x).sin()
                + (2.0 * std::f64::consts::PI * 5.0 * x).cos()
        })
        .collect();
    let mut body = String::from("# n=128\ni,value\n");
    for (i, v) in values.iter().enumerate() {
        body.push_str(&format!("{},{}\n", i + 1, v));
    }
    std::fs::write(&sig_path, body).unwrap();

    let outdir = dir.path().join("dif");
    let out = sif()
        .args(["dif", "--input"])
        .arg(&sig_path)
        .args(["--delta", "5e-3", "-o"])
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(outdir.join("imf_1.csv").exists());
    let diag: serde_json::Value = serde_json::from_str(&read(&outdir.join("diagnostics.json"))).unwrap();
    assert!(diag["imf_count"].as_u64().unwrap() >= 1);
}

#[test]
fn test1_emits_all_files_at_tiny_n() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("t1");
    let out = sif()
        .args([
            "test1", "--n", "12", "--radius", "0.5", "--quad", "3", "-o",
        ])
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "eigs_exact.csv",
        "eigs_op.csv",
        "eigs_symbol.csv",
        "zoom.csv",
        "manifest.json",
    ] {
        assert!(outdir.join(f).exists(), "missing {f}");
    }
    // N^2 = 144 rows after the two header lines
    let body = read(&outdir.join("eigs_exact.csv"));
    assert_eq!(body.lines().count(), 2 + 144);
    let zoom = read(&outdir.join("zoom.csv"));
    assert_eq!(zoom.lines().count(), 2 + 144 / 5);
}

#[test]
fn test2_emits_all_files_at_tiny_n() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("t2");
    let out = sif()
        .args([
            "test2",
            "--n",
            "24",
            "--radius",
            "0.35",
            "--iterations",
            "10",
            "-o",
        ])
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "signal.csv",
        "imf1_naive.csv",
        "imf1_sif.csv",
        "err_map_naive.csv",
        "err_map_sif.csv",
        "err_curves.csv",
        "manifest.json",
        "diagnostics.json",
    ] {
        assert!(outdir.join(f).exists(), "missing {f}");
    }
    // curves truncated at --iterations
    let curves = read(&outdir.join("err_curves.csv"));
    assert_eq!(curves.lines().count(), 2 + 10);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = sif()
            .args(["--threads", "1", "symbol", "--n", "16", "--m", "4", "-o"])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
