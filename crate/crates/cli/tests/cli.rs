//! End-to-end runs of the `wavefocus` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn wavefocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavefocus")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_owned()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn shipped_configs_validate() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let o = wavefocus(&["validate", "--config", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn simulate_writes_inspectable_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavefocus(&["simulate", "--config", &config("simulate.toml"), "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let artifacts: Vec<&str> = report["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    assert!(artifacts.contains(&"boundary.wfoc"));
    let snap = artifacts.iter().find(|a| a.starts_with("u_t") && a.ends_with(".wfoc")).unwrap();
    let o = wavefocus(&["inspect", dir.path().join(snap).to_str().unwrap()]);
    assert!(o.status.success());
    let header: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(header["dims"], serde_json::json!([65, 65]));
    assert!(header["max_abs"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_adjoint_passes_on_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = wavefocus(&["run", "--config", &config("verify_adjoint.toml"), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["all_passed"], Value::Bool(true));
}

#[test]
fn schema_violations_exit_2_with_every_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("wave_time_ii.toml")).unwrap();
    let bad = text.replace("final_time = 2.0", "final_time = \"two\"\nwidth = 3").replace("a = 0.9", "");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, bad).unwrap();
    let o = wavefocus(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let diag = stderr_json(&o);
    assert_eq!(diag["exit_code"], 2);
    let problems = diag["problems"].as_array().unwrap();
    let text = |k: &str| problems.iter().any(|p| p.as_str().unwrap().contains(k));
    assert!(text("grid.final_time") && text("grid.width") && text("target.a"), "{problems:?}");
}

#[test]
fn zero_threads_is_a_config_error() {
    let o = wavefocus(&["run", "--config", &config("simulate.toml"), "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_not_a_config_success() {
    let o = wavefocus(&["inspect", "/nonexistent/field.wfoc"]);
    assert!(!o.status.success());
}
