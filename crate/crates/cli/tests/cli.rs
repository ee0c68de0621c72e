use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn cwc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cwc")).args(args).output().unwrap()
}

fn scenario(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    root.join(name).to_str().unwrap().to_string()
}

#[test]
fn run_path_write_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = cwc(&["run", &scenario("path_write.json"), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("scenario_id,task,n,s,bc,bl,rounds,bound,ratio,seed"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "cW");
    // Bound is the timespan of the cluster around node 0.
    assert_eq!(row[7], "31.0");
    let rounds: u32 = row[6].parse().unwrap();
    assert!((31..=93).contains(&rounds));
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(result["algorithm"], "fat");
}

#[test]
fn bad_schema_exits_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"nodes": 2, "links": [], "cloud_links": [], "task": {"kind": "cW", "node": 0}, "s": 8, "seed": 1, "colour": 3}"#).unwrap();
    let out = cwc(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "scenario");
    assert!(err["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn trace_is_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = cwc(&["run", &scenario("path_write.json"), "--trace", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let trace = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    assert!(trace.lines().count() > 0);
    for line in trace.lines() {
        let ev: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(ev["round"].is_u64());
    }
}

#[test]
fn seed_override_changes_only_seed_column() {
    let out = cwc(&["run", &scenario("ring_fl.json"), "--seed", "99"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).trim_end().ends_with(",99"));
}

#[test]
fn sweep_is_reproducible() {
    let a = cwc(&["sweep", &scenario("wheel_write_sweep.json")]);
    let b = cwc(&["sweep", &scenario("wheel_write_sweep.json")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    for line in text.lines().skip(1) {
        let ratio: f64 = line.split(',').nth(8).unwrap().parse().unwrap();
        assert!(ratio > 0.0 && ratio <= 4.0, "{line}");
    }
}

#[test]
fn empty_sweep_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("empty.json");
    fs::write(&spec, r#"{"topology": "path", "n": [], "s": [8], "bc": [1], "bl": [1], "task": {"kind": "cW", "node": 0}, "seed": 0}"#).unwrap();
    let out = cwc(&["sweep", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(dir.path().join("sweep.csv")).unwrap(),
        "scenario_id,task,n,s,bc,bl,rounds,bound,ratio,seed\n"
    );
}

#[test]
fn verify_fast_runs_oracle_only() {
    let out = cwc(&["verify", "--fast"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS]  1 quickest-flow optimality"));
    assert!(text.contains("1/1 criteria passed"));
}

#[test]
fn corrupted_operator_names_the_law() {
    let out = cwc(&["verify", "--corrupt-operator"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("generic combine")).unwrap();
    assert!(line.starts_with("[FAIL]") && line.contains("associativity"), "{line}");
}
