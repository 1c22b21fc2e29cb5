use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn validim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_validim"))
        .args(args)
        .current_dir(dir)
        .env_remove("VALIDIM_THREADS")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn contour_writes_csv_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = validim(dir.path(), &["contour", "--model", "t-location", "--df", "3", "--y", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = dir.path().join("contour.csv");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("theta,plausibility\n"));
    assert!(!text.contains('\r'));
    let table = rows(&csv);
    assert_eq!(table.len(), 401);
    let peak = table.iter().find(|r| r[0] == 0.0).unwrap();
    assert_eq!(peak[1], 1.0);
    // Seventeen significant digits.
    let first = text.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(first.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("contour.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "contour");
    assert_eq!(manifest["config"]["model"]["family"], "t-location");
    assert!(manifest["version"].is_string());
}

#[test]
fn binomial_contour_has_a_plateau() {
    let dir = TempDir::new().unwrap();
    let out = validim(dir.path(), &["contour", "--model", "binomial", "--n", "18", "--y", "7", "--points", "201"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(&dir.path().join("contour.csv"));
    assert_eq!(table.len(), 201);
    assert!(table.iter().any(|r| r[1] == 1.0));
    assert!(table.iter().all(|r| (0.0..=1.0).contains(&r[1])));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing_y = validim(dir.path(), &["contour", "--model", "t-location", "--df", "3"]);
    assert_eq!(missing_y.status.code(), Some(2));
    let missing_n = validim(dir.path(), &["contour", "--model", "binomial", "--y", "3"]);
    assert_eq!(missing_n.status.code(), Some(2));
    let empty_grid = validim(dir.path(), &["risk-curve", "--model", "skew-normal", "--y", "0", "--points", "0"]);
    assert_eq!(empty_grid.status.code(), Some(2));
    let bad_action = validim(dir.path(), &["risk-curve", "--model", "skew-normal", "--y", "0", "--actions", ""]);
    assert_eq!(bad_action.status.code(), Some(2));
    let wrong_model =
        validim(dir.path(), &["decide", "--model", "binomial", "--n", "10", "--y", "3", "--loss", "group-invariant"]);
    assert_eq!(wrong_model.status.code(), Some(2));
    let no_threads = validim(dir.path(), &["--threads", "0", "contour", "--model", "t-location", "--y", "0"]);
    assert_eq!(no_threads.status.code(), Some(2));
}

#[test]
fn decide_reports_both_minimizers() {
    let dir = TempDir::new().unwrap();
    let out = validim(dir.path(), &["decide", "--model", "t-location", "--y", "1.3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let d: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((d["action"].as_f64().unwrap() - 1.3).abs() < 1e-6);
    assert!((d["fiducial_action"].as_f64().unwrap() - 1.3).abs() < 1e-6);
    assert!(d["upper_risk"].as_f64().unwrap() >= d["fiducial_risk"].as_f64().unwrap());
    let written: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("decision.json")).unwrap()).unwrap();
    assert_eq!(written, d);

    let out = validim(dir.path(), &["decide", "--model", "binomial", "--n", "18", "--y", "7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let d: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((d["action"].as_f64().unwrap() - d["fiducial_action"].as_f64().unwrap()).abs() < 0.02);
}

#[test]
fn numerical_failures_exit_with_three_and_json() {
    let dir = TempDir::new().unwrap();
    // Squared error has no upper expectation under a Cauchy contour.
    let out = validim(dir.path(), &["decide", "--model", "t-location", "--df", "1", "--y", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(report["command"], "decide");
    assert_eq!(report["error"], "non-previsible");
}

#[test]
fn upper_risk_curve_lies_above_fiducial() {
    let dir = TempDir::new().unwrap();
    let out = validim(dir.path(), &["risk-curve", "--model", "skew-normal", "--y", "0", "--points", "21"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(&dir.path().join("risk_curve.csv"));
    assert_eq!(table.len(), 21);
    assert!(table.iter().all(|r| r[1] > r[2]));
}

#[test]
fn shipped_binomial_config_reproduces_the_crossing() {
    let dir = TempDir::new().unwrap();
    let cfg = config("fig4.toml");
    let out = validim(dir.path(), &["validity", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = dir.path().join("validity.csv");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("alpha,cdf_im,se_im,cdf_fiducial,se_fiducial\n"));
    let table = rows(&csv);
    assert_eq!(table.len(), 99);
    assert!(table.iter().all(|r| r[1] <= r[0]));
    assert!(table.iter().any(|r| r[3] > r[0]));

    let before = fs::read(&csv).unwrap();
    fs::remove_file(&csv).unwrap();
    let replay = validim(dir.path(), &["replay", "--manifest", "validity.csv.manifest.json"]);
    assert!(replay.status.success(), "{}", stderr(&replay));
    assert_eq!(fs::read(&csv).unwrap(), before);
}

#[test]
fn monte_carlo_replay_is_bit_exact_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = config("fig2.toml");
    let out = validim(dir.path(), &["validity", "--config", cfg.to_str().unwrap(), "--replications", "200"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validity.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 20240917);
    assert_eq!(manifest["config"]["replications"], 200);

    let replay = Command::new(env!("CARGO_BIN_EXE_validim"))
        .args(["replay", "--manifest", "validity.csv.manifest.json", "--out", "again.csv"])
        .current_dir(dir.path())
        .env("VALIDIM_THREADS", "1")
        .output()
        .unwrap();
    assert!(replay.status.success(), "{}", stderr(&replay));
    assert_eq!(fs::read(dir.path().join("validity.csv")).unwrap(), fs::read(dir.path().join("again.csv")).unwrap());
    assert!(dir.path().join("again.csv.manifest.json").exists());
}

#[test]
fn malformed_config_points_at_the_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.toml"), "theta = 0.0\n[model]\nfamily = \"t-location\"\ndf = \n").unwrap();
    let out = validim(dir.path(), &["validity", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.toml:4:6:"), "{}", stderr(&out));

    fs::write(dir.path().join("typo.toml"), "theta = 0.0\nseeed = 3\n[model]\nfamily = \"binomial\"\nn = 5\n").unwrap();
    let out = validim(dir.path(), &["validity", "--config", "typo.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("typo.toml:2:1:"), "{}", stderr(&out));
}
