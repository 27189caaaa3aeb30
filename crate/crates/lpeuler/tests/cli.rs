//! End-to-end checks of the `lpeuler` binary: exit codes, output schemas,
//! and reproducibility.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use lpeuler::field::{FrequencyGrid, SpectralField, TWO_PI};
use lpeuler::io::{write_field_binary, FieldFile};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpeuler"))
}

fn write_zero_field(path: &Path) {
    let grid: Arc<FrequencyGrid> = FrequencyGrid::new(32, TWO_PI).unwrap();
    let zero = SpectralField::zeros(&grid);
    let file = FieldFile::scalar(32, TWO_PI, zero.to_physical());
    write_field_binary(path, &file).unwrap();
}

#[test]
fn norms_of_zero_field_prints_zero() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("zero.lpf");
    write_zero_field(&field);
    let out = bin()
        .args([
            "norms",
            "--input",
            field.to_str().unwrap(),
            "--space",
            "B:s=2,p=2,q=2",
            "--weight",
            "log:alpha=1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let value: f64 = text.trim().parse().unwrap();
    assert_eq!(value, 0.0);
}

#[test]
fn verify_paraproduct_writes_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("para.csv");
    let out = bin()
        .args([
            "verify",
            "--suite",
            "paraproduct",
            "--samples",
            "10",
            "--grid",
            "64",
            "--seed",
            "1",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("sample_id"))
        .collect();
    // ten samples and the summary row
    assert_eq!(rows.len(), 11, "unexpected rows: {rows:?}");
    let summary = rows.last().unwrap();
    assert!(summary.starts_with("max_ratio"));
    let max_ratio: f64 = summary.rsplit(',').next().unwrap().parse().unwrap();
    assert!(max_ratio <= 1e-10, "identity residual criterion: {max_ratio}");
}

#[test]
fn simulate_taylor_keeps_space_norm_constant() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("taylor.csv");
    let cfg_path = dir.path().join("taylor.cfg");
    std::fs::write(
        &cfg_path,
        format!(
            "grid_n = 64\ndt = 1e-3\nt_end = 0.2\ninit = taylor\nsample_every = 20\nout = {}\n",
            csv_path.display()
        ),
    )
    .unwrap();
    let out = bin()
        .args(["simulate", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut norms = Vec::new();
    for line in csv.lines() {
        if line.starts_with('#') || line.starts_with("t,") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        norms.push(cols[8].parse::<f64>().unwrap());
    }
    assert!(norms.len() >= 5);
    let first = norms[0];
    for v in &norms {
        assert!((v - first).abs() < 1e-6 * first, "norm drifted: {v} vs {first}");
    }
}

#[test]
fn iterate_uniform_bound_reported() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("iter.csv");
    let cfg_path = dir.path().join("iter.cfg");
    std::fs::write(
        &cfg_path,
        format!(
            "grid_n = 64\ndt = 4e-3\nt_end = 0.2\ninit = taylor\nsample_every = 10\nn_max = 3\nenforce_t0 = true\nc_empirical = 1.0\nout = {}\n",
            csv_path.display()
        ),
    )
    .unwrap();
    let out = bin()
        .args(["iterate", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n,"))
        .collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row.ends_with("true"), "uniform bound flag missing in {row}");
    }
}

#[test]
fn weights_subcommand_reports_admissibility() {
    let out = bin()
        .args(["weights", "--weight", "log:alpha=1", "--r", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("admissible for r = 2: true"));
}

#[test]
fn configuration_errors_exit_2() {
    // unknown suite
    let out = bin().args(["verify", "--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // missing config file
    let out = bin()
        .args(["simulate", "--config", "/nonexistent/x.cfg"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown config key
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "grid_n = 64\ndt = 1e-3\nt_end = 0.1\nnot_a_key = 7\n").unwrap();
    let out = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // malformed space spec
    let dir2 = tempfile::tempdir().unwrap();
    let field = dir2.path().join("zero.lpf");
    write_zero_field(&field);
    let out = bin()
        .args([
            "norms",
            "--input",
            field.to_str().unwrap(),
            "--space",
            "Q:s=2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn violation_exit_code_is_one() {
    use lpeuler::Error;
    assert_eq!(lpeuler::cli::exit_code(&Error::Violation("x".into())), 1);
    assert_eq!(lpeuler::cli::exit_code(&Error::Numeric("x".into())), 1);
    assert_eq!(lpeuler::cli::exit_code(&Error::Config("x".into())), 2);
}

#[test]
fn thread_cap_env_is_honored() {
    let out = bin()
        .env("LPEULER_THREADS", "1")
        .args([
            "verify",
            "--suite",
            "bernstein",
            "--samples",
            "3",
            "--grid",
            "64",
            "--seed",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
