use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SCORES: &str = "id1,id2,score\nm0,b0,0.99\nm0,b1,0.94\nm1,b0,0.87\nm1,b1,0.81\n";
const LEFT: &str = "id,titles,year\nm0,Die Hard,1988\nm1,Making of Die Hard,1989\n";
const RIGHT: &str = "id,titles,year\nb0,Die Hard,1988\nb1,Die Hard Bonus Material,1989\n";
const TRUTH: &str = "id1,id2,label\nm0,b0,+\nm1,b1,+\n*,*,-\n";

fn onematch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onematch")).args(args).current_dir(dir).output().unwrap()
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("scores.csv", SCORES), ("left.csv", LEFT), ("right.csv", RIGHT), ("truth.csv", TRUTH)] {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn greedy_keeps_the_feature_and_companion_apart() {
    let dir = fixture();
    let out = onematch(
        dir.path(),
        &["match", "--scores", "scores.csv", "--algorithm", "greedy", "--threshold", "0.45", "--out", "greedy.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "greedy.csv"), "id1,id2,score\nm0,b0,0.99\nm1,b1,0.81\n");
}

#[test]
fn max_weight_crosses_the_pairs_and_evaluates_to_zero() {
    let dir = fixture();
    let out = onematch(
        dir.path(),
        &["match", "--scores", "scores.csv", "--algorithm", "max-weight", "--threshold", "0.55", "--out", "mw.csv"],
    );
    assert!(out.status.success());
    assert_eq!(read(dir.path(), "mw.csv"), "id1,id2,score\nm0,b1,0.94\nm1,b0,0.87\n");

    let out = onematch(
        dir.path(),
        &["eval", "--left", "left.csv", "--right", "right.csv", "--matching", "mw.csv", "--truth", "truth.csv"],
    );
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["tp"], 0);
    assert_eq!(report["fn"], 2);
    // Each wrong pair is a known negative and blocks one true pair per side.
    assert_eq!(report["fp"], 6);
    assert_eq!(report["recall"], 0.0);
}

#[test]
fn eval_writes_json_file_when_asked() {
    let dir = fixture();
    onematch(dir.path(), &["match", "--scores", "scores.csv", "--algorithm", "greedy", "--out", "g.csv"]);
    let out = onematch(
        dir.path(),
        &["eval", "--left", "left.csv", "--right", "right.csv", "--matching", "g.csv", "--truth", "truth.csv", "--out", "e.json"],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&read(dir.path(), "e.json")).unwrap();
    assert_eq!(report["precision"], 1.0);
    assert_eq!(report["recall"], 1.0);
}

#[test]
fn missing_input_exits_1_with_coded_message() {
    let dir = fixture();
    let out = onematch(dir.path(), &["match", "--scores", "absent.csv", "--out", "m.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: model:FileNotFound:"), "{stderr}");
    assert!(stderr.contains("absent.csv"));
    assert!(!dir.path().join("m.csv").exists(), "no output on failure");
}

#[test]
fn bad_threshold_is_a_config_error() {
    let dir = fixture();
    let out = onematch(dir.path(), &["match", "--scores", "scores.csv", "--threshold", "1.5", "--out", "m.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ConfigError"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = fixture();
    assert_eq!(onematch(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(onematch(dir.path(), &["match", "--out", "m.csv"]).status.code(), Some(2));
    assert_eq!(
        onematch(dir.path(), &["match", "--scores", "scores.csv", "--algorithm", "best", "--out", "m.csv"]).status.code(),
        Some(2)
    );
}

#[test]
fn ingest_canonicalizes_and_round_trips() {
    let dir = fixture();
    assert!(onematch(dir.path(), &["ingest", "--input", "left.csv", "--out", "left.json"]).status.success());
    let rows: Value = serde_json::from_str(&read(dir.path(), "left.json")).unwrap();
    assert_eq!(rows[1]["titles"][0], "Making of Die Hard");
    assert_eq!(rows[0]["year"], 1988);
    assert!(onematch(dir.path(), &["ingest", "--input", "left.json", "--out", "again.json"]).status.success());
    assert_eq!(read(dir.path(), "left.json"), read(dir.path(), "again.json"));
}

#[test]
fn synth_is_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"n_left": 60, "n_right": 50}"#).unwrap();
    for out in ["a", "b", "c"] {
        let seed = if out == "c" { "8" } else { "7" };
        let res = onematch(dir.path(), &["--seed", seed, "--config", "s.json", "synth", "--out-dir", out]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(read(dir.path(), "a/left.json"), read(dir.path(), "b/left.json"));
    assert_eq!(read(dir.path(), "a/truth.csv"), read(dir.path(), "b/truth.csv"));
    assert_ne!(read(dir.path(), "a/left.json"), read(dir.path(), "c/left.json"));
    assert!(read(dir.path(), "a/truth.csv").ends_with("*,*,-\n"));
}
