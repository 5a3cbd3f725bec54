//! Black-box tests of the `gradfree` binary: exit codes, config handling,
//! trace schema, and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gradfree"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn optimize_inline_flags_succeeds() {
    let out = bin()
        .args(["optimize", "--objective", "quadratic", "--dim", "2", "--iters", "200", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(summary["iterations_completed"], 200);
    assert!(summary["best_value"].as_f64().unwrap() < 0.1);
}

#[test]
fn unknown_objective_is_a_config_error() {
    let out = bin()
        .args(["optimize", "--objective", "nonexistent", "--dim", "1", "--iters", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nonexistent"), "stderr: {}", stderr(&out));
}

#[test]
fn bad_beta_in_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "objective = \"quadratic\"\ndim = 1\niterations = 5\nbeta = 1.5\n")
        .unwrap();
    let out = bin().args(["optimize", "--config", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("beta must lie in (0,1)"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "objective = \"quadratic\"\ndim = 1\niterations = 5\ntypo_key = 3\n")
        .unwrap();
    let out = bin().args(["optimize", "--config", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("typo_key"), "stderr: {}", stderr(&out));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "objective = \"quadratic\"\ndim = 1\niterations = 5\nseed = 1\n")
        .unwrap();
    let out = bin()
        .args(["optimize", "--config", path.to_str().unwrap(), "--seed", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(summary["seed"], 2);
}

#[test]
fn opt_seed_env_is_default_and_flag_wins() {
    let args = ["optimize", "--objective", "quadratic", "--dim", "1", "--iters", "5"];
    let out = bin().args(args).env("OPT_SEED", "42").output().unwrap();
    let summary: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(summary["seed"], 42);

    let out = bin().args(args).env("OPT_SEED", "42").args(["--seed", "3"]).output().unwrap();
    let summary: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(summary["seed"], 3);
}

#[test]
fn trace_has_versioned_stable_schema_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = dir.path().join("a.jsonl");
    let t2 = dir.path().join("b.jsonl");
    for t in [&t1, &t2] {
        let out = bin()
            .args([
                "optimize", "--objective", "staircase", "--dim", "1", "--iters", "50",
                "--seed", "9", "--trace", t.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let a = std::fs::read(&t1).unwrap();
    let b = std::fs::read(&t2).unwrap();
    assert_eq!(a, b, "identical config + seed must give byte-identical traces");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(header["trace_schema_version"].is_u64());
    let mut expected: Vec<&str> =
        vec!["n", "theta", "gamma", "lambda", "h", "best_value", "best_point", "min_l", "max_l"];
    expected.sort_unstable();
    let mut count = 0;
    for line in lines {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        let mut keys: Vec<&str> = rec.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, expected, "record fields must match the schema exactly");
        count += 1;
    }
    assert_eq!(count, 50);
}

#[test]
fn verify_schedule_suite_passes() {
    let out = bin().args(["verify", "--suite", "schedule", "--beta", "0.4", "--dim", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("suite: pass"));
}

#[test]
fn verify_epi_suite_treats_alternating_family_as_expected_failure() {
    let out = bin().args(["verify", "--suite", "epi"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("expected failure"), "stdout: {text}");
    assert!(text.contains("suite: pass"), "stdout: {text}");
}

#[test]
fn verify_all_suites_pass() {
    let out = bin().args(["verify", "--suite", "all", "--seed", "7"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("suite: pass"));
}

#[test]
fn verify_runs_are_deterministic() {
    let run = || {
        let out = bin().args(["verify", "--suite", "schedule", "--seed", "7"]).output().unwrap();
        stdout(&out)
    };
    assert_eq!(run(), run());
}

#[test]
fn auc_exact_on_toy_fixture_writes_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("runs.jsonl");
    let out = bin()
        .args([
            "auc",
            "--data",
            fixture("separable6.csv").to_str().unwrap(),
            "--method",
            "exact",
            "--runs",
            "3",
            "--iters",
            "150",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("median final risk"), "stdout: {}", stdout(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let records: Vec<serde_json::Value> =
        text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for rec in &records {
        assert_eq!(rec["dataset"], "separable6");
        assert!(rec["final_risk"].as_f64().unwrap() <= 0.5);
    }
}

#[test]
fn auc_missing_file_exits_one() {
    let out = bin().args(["auc", "--data", "/nonexistent/file.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
