use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_detflow");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn detflow(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().next().expect("one error line")).expect("stderr is JSON")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const MINIMAL: &str = r#"{"layers":[[{"id":"S","inputs":1}],[{"id":"D","outputs":1}]],
    "edges":[{"from":"S","x":0,"to":"D","y":0}]}"#;
const EDGELESS: &str = r#"{"layers":[[{"id":"S","inputs":1}],[{"id":"D","outputs":1}]]}"#;
const CHAIN: &str = r#"{"layers":[[{"id":"S","inputs":1}],[{"id":"A","inputs":1,"outputs":1}],[{"id":"D","outputs":1}]],
    "edges":[{"from":"S","x":0,"to":"A","y":0},{"from":"A","x":0,"to":"D","y":0}]}"#;

#[test]
fn capacity_of_minimal_and_edgeless() {
    let dir = tempfile::tempdir().unwrap();
    let out = detflow(&["capacity", &write(&dir, "m.json", MINIMAL)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"capacity":1}"#);
    let out = detflow(&["capacity", &write(&dir, "e.json", EDGELESS)]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"capacity":0}"#);
}

#[test]
fn fixture_a_with_and_without_legacy_backward() {
    let a = fixture("fixture_a.json");
    let a = a.to_str().unwrap();
    assert_eq!(stdout_json(&detflow(&["capacity", a]))["capacity"], 4);
    assert_eq!(
        stdout_json(&detflow(&["capacity", a, "--legacy-backward"]))["capacity"],
        3
    );
    assert_eq!(stdout_json(&detflow(&["oracle", a, "--path-search"]))["capacity"], 4);
}

#[test]
fn fixture_b_with_and_without_legacy_same_layer() {
    let b = fixture("fixture_b.json");
    let b = b.to_str().unwrap();
    assert_eq!(stdout_json(&detflow(&["capacity", b]))["capacity"], 2);
    assert_eq!(
        stdout_json(&detflow(&["capacity", b, "--legacy-same-layer"]))["capacity"],
        1
    );
    assert_eq!(stdout_json(&detflow(&["oracle", b, "--path-search"]))["capacity"], 2);
}

#[test]
fn capacity_sections_are_optional() {
    let b = fixture("fixture_b.json");
    let v = stdout_json(&detflow(&["capacity", b.to_str().unwrap(), "--paths", "--counters"]));
    assert_eq!(v["paths"].as_array().unwrap().len(), 2);
    assert!(v["counters"]["eliminations"].as_u64().unwrap() > 0);
    assert!(v.get("argmin_cut").is_none());
}

#[test]
fn oracle_reports_minimal_cut() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&detflow(&["oracle", &write(&dir, "c.json", CHAIN)]));
    assert_eq!(v["capacity"], 1);
    assert_eq!(v["argmin_cut"], serde_json::json!(["S"]));
    assert_eq!(v["counters"]["cuts_examined"], 2);
}

#[test]
fn oracle_limit_is_an_explicit_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = detflow(&["oracle", &write(&dir, "c.json", CHAIN), "--limit", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "too_large");
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("fixture_a.json");
    let net = net.to_str().unwrap();
    let out = detflow(&["capacity", net, "--paths"]);
    let own = write(&dir, "own.json", &String::from_utf8_lossy(&out.stdout));
    assert_eq!(detflow(&["verify", net, &own]).status.code(), Some(0));

    let mut v = stdout_json(&out);
    v["paths"][0].as_array_mut().unwrap().remove(0);
    let tampered = write(&dir, "cut.json", &v.to_string());
    let out = detflow(&["verify", net, &tampered]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("disconnected path"));

    let mut v = stdout_json(&detflow(&["capacity", net, "--paths"]));
    let first = v["paths"][0].clone();
    v["paths"][1] = first;
    let duplicated = write(&dir, "dup.json", &v.to_string());
    let out = detflow(&["verify", net, &duplicated]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("rank deficit"));
}

#[test]
fn verify_rejects_capacity_without_paths() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(&dir, "m.json", MINIMAL);
    let claim = write(&dir, "r.json", r#"{"capacity":1}"#);
    let out = detflow(&["verify", &net, &claim]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("capacity mismatch"));
}

#[test]
fn parse_and_validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = detflow(&["capacity", &write(&dir, "bad.json", "{not json")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "parse");

    let skip = r#"{"layers":[[{"id":"S","inputs":1}],[{"id":"A","inputs":1,"outputs":1}],[{"id":"D","outputs":1}]],
        "edges":[{"from":"S","x":0,"to":"D","y":0}]}"#;
    let out = detflow(&["capacity", &write(&dir, "skip.json", skip)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "invalid_network");
    assert!(err["details"][0].as_str().unwrap().contains("non-adjacent layers"));

    let out = detflow(&["capacity", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "io");

    let out = detflow(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");
}

#[test]
fn gen_is_deterministic_and_valid() {
    let args = [
        "gen", "--layers", "4", "--nodes", "3", "--levels", "2", "--field", "3", "--seed", "11",
    ];
    let a = detflow(&args);
    let b = detflow(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["field"], 3);
    for e in v["edges"].as_array().unwrap() {
        let c = e["coeff"].as_i64().unwrap();
        assert!(c == 1 || c == 2);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "g.json", &String::from_utf8_lossy(&a.stdout));
    assert_eq!(detflow(&["capacity", &path]).status.code(), Some(0));
}

#[test]
fn gen_density_zero_is_edgeless() {
    let v = stdout_json(&detflow(&["gen", "--layers", "2", "--density", "0"]));
    assert!(v["edges"].as_array().unwrap().is_empty());
}

#[test]
fn gen_rejects_bad_params() {
    let out = detflow(&["gen", "--layers", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "bad_params");
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out = detflow(&[
        "bench",
        "--sizes",
        "3,4",
        "--trials",
        "2",
        "--seed",
        "5",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "seed,L,M,V_x,E,p,C,wall_ns,eliminations,type1_visits,type2_visits,backward_rewirings"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("5,3,"));

    let out = detflow(&["bench", "--trials", "0"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn export_dot_with_and_without_result() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(&dir, "m.json", MINIMAL);
    let dot = String::from_utf8(detflow(&["export-dot", &m]).stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), 1);
    assert!(!dot.contains("color="));

    let a = fixture("fixture_a.json");
    let a = a.to_str().unwrap();
    let result = write(
        &dir,
        "r.json",
        &String::from_utf8_lossy(&detflow(&["capacity", a, "--paths"]).stdout),
    );
    let dot = String::from_utf8(detflow(&["export-dot", a, &result]).stdout).unwrap();
    for colour in ["red", "blue", "forestgreen", "darkorange"] {
        assert!(dot.contains(&format!("color={colour}")), "missing {colour}");
    }
}
