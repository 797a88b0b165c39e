use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bcur(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcur")).current_dir(dir).args(args).output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn identity(dir: &Path) {
    std::fs::write(dir.join("id.csv"), "1,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n").unwrap();
}

#[test]
fn identity_is_recovered_exactly() {
    let dir = tempfile::tempdir().unwrap();
    identity(dir.path());
    let out = bcur(
        dir.path(),
        &["decompose", "--input", "id.csv", "--seed", "1", "--k", "4", "--rows", "4", "--blocks", "4", "--block-size", "1", "--mode", "without", "--row-sampling", "distinct", "--out-dir", "o"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&std::fs::read(dir.path().join("o/report.json")).unwrap());
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "decompose");
    assert_eq!(report["result"]["trial_errors"][0].as_f64(), Some(0.0));
    for f in ["C.csv", "U.csv", "R.csv", "W.csv"] {
        assert!(dir.path().join("o").join(f).exists());
    }
}

#[test]
fn score_probabilities_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let gen = bcur(dir.path(), &["gen", "--seed", "2", "--rows", "20", "--cols", "30", "--rank", "3", "--out", "a.csv"]);
    assert!(gen.status.success());
    let out = bcur(dir.path(), &["scores", "--input", "a.csv", "--k", "3", "--block-size", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("block,"));
    let (mut total, mut score) = (0.0, 0.0);
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        score += fields[5].parse::<f64>().unwrap();
        total += fields[6].parse::<f64>().unwrap();
    }
    assert!((total - 1.0).abs() < 1e-12);
    assert!((score - 3.0).abs() < 1e-10);
}

#[test]
fn simulate_contacts_three_executors() {
    let dir = tempfile::tempdir().unwrap();
    let out = bcur(dir.path(), &["simulate", "--seed", "1", "--blocks", "3", "--block-size", "2", "--executors", "3", "--plan", "0,1,2"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["result"]["report"]["executors_contacted"], 3);
    assert_eq!(v["result"]["dominance"]["dominates"], true);
}

#[test]
fn single_block_multiplication_never_violates() {
    let dir = tempfile::tempdir().unwrap();
    let out = bcur(dir.path(), &["validate", "mult", "--seed", "4", "--g", "1", "--block-size", "6", "--trials", "100", "--out", "cdf.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["result"]["violations"], 0);
    assert!(std::fs::read_to_string(dir.path().join("cdf.csv")).unwrap().starts_with("ratio,cdf"));
}

#[test]
fn malformed_csv_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "1,2\n3,x\n").unwrap();
    let out = bcur(dir.path(), &["scores", "--input", "bad.csv", "--k", "1", "--block-size", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = json(&out.stderr);
    assert_eq!(err["error"]["line"], 2);
    assert_eq!(err["error"]["exit_code"], 2);
}

#[test]
fn invalid_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    identity(dir.path());
    // missing seed
    let out = bcur(dir.path(), &["decompose", "--input", "id.csv", "--k", "1", "--rows", "1", "--blocks", "1", "--block-size", "1", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    // k larger than the matrix
    let out = bcur(dir.path(), &["decompose", "--input", "id.csv", "--seed", "1", "--k", "9", "--rows", "2", "--blocks", "1", "--block-size", "1", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(bcur(dir.path(), &["--help"]).status.success());
}
