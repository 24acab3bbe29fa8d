//! End-to-end runs of the `reachsim` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn reachsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reachsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `0 → 1` with initial state 0, plus an isolated state 2.
fn small(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("small.aut");
    fs::write(&p, "des (0, 1, 3)\n(0, \"a\", 1)\n").unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_then_check_passes() {
    let dir = TempDir::new().unwrap();
    let aut = small(&dir);
    for (engine, theorem, sigma) in [("explicit", "1", "empty"), ("partition", "5", "initials"), ("twopr", "3", "empty")] {
        let report = dir.path().join(format!("{engine}.json"));
        let o = reachsim(&["run", "--engine", engine, "--input", s(&aut), "--sigma", sigma, "--output", s(&report)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = reachsim(&["check", "--input", s(&aut), "--report", s(&report), "--theorem", theorem]);
        assert_eq!(code(&o), 0, "{engine}: {}", stdout(&o));
        assert!(stdout(&o).contains("holds"));
    }
}

#[test]
fn tampered_report_fails_check() {
    let dir = TempDir::new().unwrap();
    let aut = small(&dir);
    let o = reachsim(&["run", "--input", s(&aut)]);
    let mut json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    json["sigma"] = serde_json::json!([]);
    let report = dir.path().join("bad.json");
    fs::write(&report, json.to_string()).unwrap();
    let o = reachsim(&["check", "--input", s(&aut), "--report", s(&report), "--theorem", "explicit"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAILS"));
}

#[test]
fn report_for_another_instance_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let aut = small(&dir);
    let report = dir.path().join("r.json");
    reachsim(&["run", "--input", s(&aut), "--output", s(&report)]);
    let o = reachsim(&["check", "--input", s(&aut), "--preorder", "identity", "--report", s(&report), "--theorem", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn output_repeats_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let aut = dir.path().join("r.aut");
    let o = reachsim(&["gen-random", "--states", "40", "--labels", "2", "--density", "0.1", "--seed", "9", "--output", s(&aut)]);
    assert_eq!(code(&o), 0);
    for engine in ["explicit", "twopr", "partition"] {
        let args = [
            "run", "--engine", engine, "--input", s(&aut), "--sigma", "initials", "--branch", "random", "--pick", "random", "--seed", "4",
        ];
        let a = reachsim(&args);
        let b = reachsim(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{engine}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let aut = small(&dir);
    let missing = dir.path().join("missing.aut");
    assert_eq!(code(&reachsim(&["run", "--input", s(&missing)])), 2);
    // the partition engine needs I ⊆ σ
    assert_eq!(code(&reachsim(&["run", "--engine", "partition", "--input", s(&aut)])), 2);
    assert_eq!(code(&reachsim(&["run", "--input", s(&aut), "--cap", "0"])), 3);
    let bad = dir.path().join("bad.aut");
    fs::write(&bad, "des (0, 1, 2)\n(0, \"a\", 5)\n").unwrap();
    assert_eq!(code(&reachsim(&["validate", "--input", s(&bad)])), 2);
    let o = reachsim(&["validate", "--input", s(&aut)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("3 states, 1 transitions"), "{}", stdout(&o));
}

#[test]
fn symbolic_systems() {
    let o = reachsim(&["run", "--system", "collapse-to-zero"]);
    assert_eq!(code(&o), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["final"], true);
    assert_eq!(json["counters"]["refine"], 1);
    let o = reachsim(&["run", "--system", "left-chain"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["sigma"], serde_json::json!([0]));
}

#[test]
fn unroll_and_bench() {
    let dir = TempDir::new().unwrap();
    let core = dir.path().join("core.aut");
    let o = reachsim(&[
        "gen-random", "--states", "12", "--labels", "2", "--strongly-connected", "--extra", "6", "--seed", "1", "--output", s(&core),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let suite = dir.path().join("suite");
    fs::create_dir(&suite).unwrap();
    let unrolled = suite.join("u.aut");
    assert_eq!(code(&reachsim(&["unroll", "--input", s(&core), "--copies", "3", "--output", s(&unrolled)])), 0);
    let o = reachsim(&["validate", "--input", s(&unrolled)]);
    assert!(stdout(&o).starts_with("48 states"), "{}", stdout(&o));
    let csv = dir.path().join("out.csv");
    let o = reachsim(&["bench", "--suite", s(&suite), "--repeat", "2", "--csv", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "protocol,engine,rep,transitions,states,sigma,p,q,p_ptq,r,time_s,timed_out,gain"
    );
    assert_eq!(lines.count(), 4);
}
