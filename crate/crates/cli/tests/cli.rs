use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn regdet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regdet"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("REGDET_THREADS")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn main_theorem_one_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = regdet(dir.path(), &["main-theorem", "--m", "1", "--n-grid", "16:4096:x2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "main-theorem");
    assert_eq!(r["pass"], Value::Bool(true));
    assert_eq!(r["criteria"], serde_json::json!([2]));
    let c = r["result"]["constant"].as_f64().unwrap();
    assert!((c - 3.6757541).abs() < 1e-6);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("main-theorem: PASS"));
}

#[test]
fn logdet_small_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let out = regdet(dir.path(), &["logdet", "--m", "1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(dir.path(), "logdet")["result"]["log_det"].as_f64().unwrap();
    // 2 log 3 + 2 log(9/4π²)
    assert!((v + 0.759835).abs() < 1e-6, "{v}");
}

#[test]
fn interchange_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = regdet(dir.path(), &["interchange-check", "--all", "--tol", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "interchange-check");
    assert_eq!(r["checks"].as_array().unwrap().len(), 5);
    assert_eq!(r["criteria"], serde_json::json!([8]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // a failed check still writes the report
    let out = regdet(dir.path(), &["converge", "--m", "1", "--z", "1", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(dir.path(), "converge")["pass"], Value::Bool(false));
    assert_eq!(regdet(dir.path(), &["logdet", "--m", "9", "--n", "4"]).status.code(), Some(2));
    assert_eq!(regdet(dir.path(), &["main-theorem", "--n-grid", "16:4096:x1.1"]).status.code(), Some(2));
    assert_eq!(regdet(dir.path(), &["no-such-command"]).status.code(), Some(2));
    let degenerate = regdet(dir.path(), &["main-theorem", "--m", "1", "--basis", "0:0,1e-15:0"]);
    assert_eq!(degenerate.status.code(), Some(3));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "m = 2\nn = 4\nz = 2.0\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(regdet(dir.path(), &["trace", "--config", cfg]).status.code(), Some(0));
    let r = report(dir.path(), "trace");
    assert_eq!(r["result"]["m"], 2);
    assert_eq!(r["result"]["z"], 2.0);
    assert_eq!(regdet(dir.path(), &["trace", "--config", cfg, "--z", "0.5"]).status.code(), Some(0));
    assert_eq!(report(dir.path(), "trace")["result"]["z"], 0.5);
    std::fs::write(dir.path().join("bad.toml"), "bogus = 1\n").unwrap();
    let bad = dir.path().join("bad.toml");
    assert_eq!(regdet(dir.path(), &["trace", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let out = regdet(dir.path(), &["eigenproduct", "--m", "2", "--threads", "2"]);
        assert_eq!(out.status.code(), Some(0));
        let mut r = report(dir.path(), "eigenproduct");
        r.as_object_mut().unwrap().remove("wall_seconds");
        serde_json::to_string(&r).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn csv_series_carry_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = regdet(dir.path(), &["trace-continuum", "--m", "1", "--z", "1", "--z-grid", "0.5:8:x2", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let hash = report(dir.path(), "trace-continuum")["config_hash"].as_str().unwrap().to_string();
    let csv = std::fs::read_to_string(dir.path().join("trace-continuum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# config-hash: {hash}"));
    assert_eq!(lines.next().unwrap(), "z,value");
    assert_eq!(lines.count(), 5);
}

#[test]
fn thread_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_regdet"))
            .args(["trees", "--m", "2", "--n", "4", "--out-dir"])
            .arg(dir.path())
            .env("REGDET_THREADS", v)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("2"), Some(0));
    assert_eq!(run("many"), Some(2));
}

#[test]
fn em_check_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let out = regdet(dir.path(), &["em-check", "--m", "2", "--n", "6", "--z", "1", "--M", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "em-check");
    assert_eq!(r["result"]["decomposition"]["patterns"].as_array().unwrap().len(), 16);
    let out = regdet(dir.path(), &["em-check", "--m", "2", "--n", "6", "--pattern", "1,2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path(), "em-check")["result"]["value"], 0.0);
}
