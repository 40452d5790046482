use std::path::Path;
use std::process::{Command, Output};

fn domlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domlab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PEAKED_GAUSSIANS: &str = r#"
kind = "tensorize"
seed = 5
name = "peaked-gaussians"

[estimator]
mode = "monte_carlo"
samples = 20000

[params]
kappa = 1.0
lambda = 1.0
alpha = 1.0
gaussian_pairs = { dim = 2, count = 2 }
"#;

#[test]
fn dominated_gaussians_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "g.toml", PEAKED_GAUSSIANS);
    let out_dir = tmp.path().join("out");
    let out = domlab(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.json", "manifest.json", "domination.csv"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert!(!manifest["operations"].as_array().unwrap().is_empty());
}

#[test]
fn counterexample_exits_two_with_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = domlab(&["run", "stable-counterexample", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("expected-violation: true"));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["expected_violation"], true);
    assert_eq!(report["result"]["witness"], 65536);
}

#[test]
fn missing_seed_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &PEAKED_GAUSSIANS.replace("seed = 5\n", ""));
    let out = domlab(&["run", &cfg, "--out", tmp.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_field_reports_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "typo.toml", &PEAKED_GAUSSIANS.replace("alpha = 1.0", "alpah = 1.0"));
    let out = domlab(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn validate_accepts_every_builtin() {
    let list = domlab(&["list-experiments"]);
    assert_eq!(list.status.code(), Some(0));
    let text = String::from_utf8_lossy(&list.stdout).into_owned();
    let names: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert_eq!(names.len(), 12);
    for name in names {
        let out = domlab(&["validate", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn written_configs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = domlab(&["list-experiments", "--write", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = tmp.path().join("schur-step.toml");
    assert_eq!(domlab(&["validate", cfg.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "g.toml", PEAKED_GAUSSIANS);
    let mut reports = Vec::new();
    for threads in ["1", "4"] {
        let dir = tmp.path().join(format!("t{threads}"));
        let out = domlab(&["--threads", threads, "run", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        reports.push(std::fs::read(dir.join("report.json")).unwrap());
        reports.push(std::fs::read(dir.join("domination.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[2]);
    assert_eq!(reports[1], reports[3]);
}

#[test]
fn zero_threads_is_rejected() {
    let out = domlab(&["--threads", "0", "validate", "schur-step"]);
    assert_eq!(out.status.code(), Some(1));
}
