use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn powdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powdiff"))
        .current_dir(dir)
        .arg("--offline")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn pair_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = powdiff(dir.path(), &["pairs", "--no-save"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("coprime pairs: 101"));
    assert!(text.contains("odd alpha (18)"));
    assert!(text.contains("even alpha (13)"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(powdiff(dir.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(powdiff(dir.path(), &["sieve-kraus", "--pair", "1,7"]).status.code(), Some(1));
    // (2, 3) has no solutions with y even
    let out = powdiff(dir.path(), &["sieve-kraus", "--pair", "2,3", "--parity", "odd", "--p", "13"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(powdiff(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn search_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = powdiff(dir.path(), &["search", "--pair", "(1,23)", "--xmax", "10^4", "--n", "3,5,11", "--diff", "--no-save"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("1,23,45,2,1,11"));
    assert!(text.contains("0 missing, 0 extra"));
}

#[test]
fn frey_curve_of_a_solution() {
    let dir = tempfile::tempdir().unwrap();
    // 181^2 + 7 = 8^5
    let out = powdiff(dir.path(), &["--json", "--no-save", "frey", "--c1", "1", "--q", "7", "--x", "181", "--y", "8", "--alpha", "1", "--p", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["discriminant_matches_formula"], true);
    assert_eq!(v["result"]["level"], 14);
}

#[test]
fn bound_audit_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let out = powdiff(dir.path(), &["bounds", "--no-save"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("2 discrepancies"));
}

#[test]
fn reports_replay_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = powdiff(dir.path(), &["--out-dir", "runs", "sieve-tm", "--pair", "1,7", "--parity", "odd", "--p-range", "13..31"]);
    assert_eq!(out.status.code(), Some(0));
    let files: Vec<_> = fs::read_dir(dir.path().join("runs")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let name = files[0].file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.starts_with("sieve-tm-") && name.ends_with(".json"));

    // same inputs, same file
    powdiff(dir.path(), &["--out-dir", "runs", "sieve-tm", "--pair", "1,7", "--parity", "odd", "--p-range", "13..31"]);
    assert_eq!(fs::read_dir(dir.path().join("runs")).unwrap().count(), 1);

    let replay = powdiff(dir.path(), &["report", files[0].to_str().unwrap(), "--rerun"]);
    assert_eq!(replay.status.code(), Some(0));
    assert!(stdout(&replay).contains("byte for byte"));

    let tampered = dir.path().join("tampered.json");
    let text = fs::read_to_string(&files[0]).unwrap().replacen("\"Eliminated\"", "\"Pending\"", 1);
    fs::write(&tampered, text).unwrap();
    let replay = powdiff(dir.path(), &["report", tampered.to_str().unwrap(), "--rerun"]);
    assert_eq!(replay.status.code(), Some(2));
}

#[test]
fn config_file_sets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "seed = 11\nout_dir = \"from-file\"\n").unwrap();
    let out = powdiff(dir.path(), &["--config", "run.toml", "--seed", "12", "--json", "pairs"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["config"]["seed"], 12);
    assert!(dir.path().join("from-file").is_dir());
}
