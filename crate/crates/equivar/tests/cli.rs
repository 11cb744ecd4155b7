use std::path::PathBuf;
use std::process::{Command, Output};

use equivar::io::{ParamsJson, ReportJson, SystemJson, TensorJson};

const QUARTET: &str = "((1,2),(3,4));";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equivar")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("equivar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn dims_line() {
    let o = run(&["dims", "--model", "jc", "--tree", QUARTET]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "dim V=5 dim CV=6 ambient=15 codim=9\n");
}

#[test]
fn equations_json_round_trip() {
    let out = scratch("jc.json");
    let o = run(&["equations", "--model", "JC", "--tree", QUARTET, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("codim check: 9 equations vs codim 9: PASS"));
    let doc: SystemJson = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.equations.len(), 9);
    let provenance: Vec<&str> = doc.equations.iter().map(|e| e.provenance.as_str()).collect();
    assert_eq!(provenance.iter().filter(|p| **p == "edge").count(), 7);
    assert!(doc.equations.iter().all(|e| e.rows.len() == e.cols.len()));
}

#[test]
fn simulate_then_eval_vanishes() {
    let tensor = scratch("sim.json");
    let params = scratch("params.json");
    let o = run(&[
        "simulate",
        "--model",
        "SS",
        "--tree",
        QUARTET,
        "--seed",
        "7",
        "--fourier",
        "--out",
        tensor.to_str().unwrap(),
        "--params-out",
        params.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t: TensorJson = serde_json::from_str(&std::fs::read_to_string(&tensor).unwrap()).unwrap();
    assert_eq!(t.data.len(), 256);
    let p: ParamsJson = serde_json::from_str(&std::fs::read_to_string(&params).unwrap()).unwrap();
    assert_eq!(p.edges.len(), 5);

    let o = run(&[
        "--json",
        "verify",
        "vanish",
        "--model",
        "SS",
        "--tree",
        QUARTET,
        "--seed",
        "0",
        "--input",
        tensor.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let reports: Vec<ReportJson> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(reports[0].pass);
}

#[test]
fn same_seed_same_bytes() {
    let a = run(&["simulate", "--model", "K3", "--tree", QUARTET, "--seed", "3"]);
    let b = run(&["--threads", "1", "simulate", "--model", "K3", "--tree", QUARTET, "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["simulate", "--model", "K3", "--tree", QUARTET, "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_output_is_thread_independent() {
    let args = ["verify", "ci", "--model", "JC", "--tree", QUARTET, "--seed", "1", "--trials", "5"];
    let one = run(&[&["--threads", "1"], &args[..]].concat());
    let four = run(&[&["--threads", "4"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(stdout(&one).lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn flatten_verdicts() {
    let tensor = scratch("gmm.json");
    let o = run(&["simulate", "--model", "GMM", "--tree", QUARTET, "--seed", "2", "--out", tensor.to_str().unwrap()]);
    assert!(o.status.success());
    let path = tensor.to_str().unwrap();
    let good = run(&["flatten", "--model", "GMM", "--split", "1,2|3,4", "--input", path]);
    assert!(stdout(&good).contains("consistent with the split"));
    let bad = run(&["flatten", "--model", "GMM", "--split", "1,3|2,4", "--input", path]);
    assert!(stdout(&bad).contains("rejected"));
}

#[test]
fn claw_hypothesis_for_builtin_sets() {
    for model in ["GMM", "SS", "JC"] {
        let o = run(&["verify", "claw", "--model", model, "--seed", "0", "--trials", "3"]);
        assert!(o.status.success(), "{model}: {}", stdout(&o));
    }
    // K2 has no built-in tripod set.
    let o = run(&["verify", "claw", "--model", "K2", "--seed", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(run(&["dims", "--model", "nope", "--tree", QUARTET]).status.code(), Some(2));
    assert_eq!(run(&["dims", "--model", "JC", "--tree", "((1,2)"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--model", "JC", "--tree", QUARTET]).status.code(), Some(2));
    assert_eq!(run(&["basis", "--model", "JC", "--tree", QUARTET, "--split", "1,2|3"]).status.code(), Some(2));
}

#[test]
fn custom_group_matches_builtin() {
    let group = scratch("k3.json");
    std::fs::write(&group, r#"{"kappa":4,"generators":[[1,0,3,2],[2,3,0,1]]}"#).unwrap();
    let custom =
        run(&["multiplicities", "--model", "custom", "--group", group.to_str().unwrap(), "--n", "3", "--json"]);
    let builtin = run(&["multiplicities", "--model", "K3", "--n", "3", "--json"]);
    assert!(custom.status.success(), "{}", String::from_utf8_lossy(&custom.stderr));
    assert_eq!(custom.stdout, builtin.stdout);
}
