//! CLI contract tests: exit codes, artifact layout, and config round-trip
//! (the config embedded in an output JSON reproduces the run).

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_series-prior")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("series_prior_cli_tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const PRIOR: &str = r#""prior": {
    "alpha": 1.0,
    "truncation": { "kind": "geometric", "theta": 0.5 },
    "scale": { "kind": "inverse_gamma", "shape": 2.0, "rate": 1.0 },
    "basis_j_max": 64
}"#;

#[test]
fn malformed_config_exits_2() {
    let dir = scratch("malformed");
    let cfg = write(&dir, "bad.json", r#"{ "draws": "many" }"#);
    let status = Command::new(bin())
        .args([
            "sample-prior",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let err = String::from_utf8_lossy(&status.stderr);
    assert!(err.contains("config error"), "stderr: {err}");
}

#[test]
fn validation_error_exits_2() {
    let dir = scratch("validation");
    // Two grid points cannot support a slope fit.
    let cfg = write(
        &dir,
        "rate.json",
        &format!(
            r#"{{ "model": "white_noise", "grid": [64, 128], {PRIOR},
            "f0": {{ "kind": "power_law", "exponent": 1.5, "j_max": 20, "beta": 1.0 }},
            "replications": 2, "iters": 200, "burn_in": 50,
            "wn": {{ "j_max_data": 20 }} }}"#
        ),
    );
    let status = Command::new(bin())
        .args([
            "rate-experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn diagnostic_failure_exits_3() {
    let dir = scratch("diagnostic");
    // An absurd z threshold makes the (correct) sampler fail the check.
    let cfg = write(
        &dir,
        "geweke.json",
        &format!(
            r#"{{ "model": "white_noise", {PRIOR}, "j_max": 6, "n_samples": 2000,
            "threshold": 1e-4,
            "wn": {{ "n": 50, "j_max_data": 10 }} }}"#
        ),
    );
    let out = dir.join("out");
    let status = Command::new(bin())
        .args([
            "geweke",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    // The report is still written for inspection.
    assert!(out.join("geweke_report.json").exists());
}

#[test]
fn missing_parameter_block_exits_2() {
    let dir = scratch("missing_block");
    let cfg = write(
        &dir,
        "geweke.json",
        &format!(
            r#"{{ "model": "diffusion", {PRIOR}, "j_max": 4, "n_samples": 100 }}"#
        ),
    );
    let status = Command::new(bin())
        .args([
            "geweke",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn embedded_config_reproduces_run() {
    let dir = scratch("roundtrip");
    let cfg = write(
        &dir,
        "rate.json",
        &format!(
            r#"{{ "model": "white_noise", "grid": [64, 128, 256, 512], {PRIOR},
            "f0": {{ "kind": "power_law", "exponent": 1.5, "j_max": 40, "beta": 1.0,
                    "normalize_l2": 1.0 }},
            "replications": 2, "iters": 300, "burn_in": 100, "preflight": false,
            "wn": {{ "j_max_data": 40 }} }}"#
        ),
    );
    let run = |config: &Path, out: &Path| {
        let status = Command::new(bin())
            .args([
                "rate-experiment",
                "--config",
                config.to_str().unwrap(),
                "--seed",
                "99",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    };
    let out1 = dir.join("out1");
    run(&cfg, &out1);

    // Extract the embedded config and use it verbatim for a second run.
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("rate_result.json")).unwrap())
            .unwrap();
    let embedded = serde_json::to_string_pretty(&body["config"]).unwrap();
    let cfg2 = write(&dir, "rate_embedded.json", &embedded);
    let out2 = dir.join("out2");
    run(&cfg2, &out2);

    let a = std::fs::read(out1.join("rate_result.json")).unwrap();
    let b = std::fs::read(out2.join("rate_result.json")).unwrap();
    assert_eq!(a, b, "embedded config must reproduce the run byte-for-byte");

    let a = std::fs::read(out1.join("rate_points.csv")).unwrap();
    let b = std::fs::read(out2.join("rate_points.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn check_basis_writes_report() {
    let dir = scratch("basis");
    let cfg = write(&dir, "basis.json", r#"{ "j_max": 32, "tol": 1e-8 }"#);
    let out = dir.join("out");
    let status = Command::new(bin())
        .args([
            "check-basis",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("basis_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report["max_deviation"].as_f64().unwrap() <= 1e-8);
}
