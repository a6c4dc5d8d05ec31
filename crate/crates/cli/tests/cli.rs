use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn elastica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn hierarchy_prints_third_flow() {
    let o = elastica(&["hierarchy", "--n", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("n = 3")).expect("third flow");
    for term in ["1 * u5", "10 * u0 u3", "20 * u1 u2", "30 * u0^2 u1"] {
        assert!(line.contains(term), "{line}");
    }
}

#[test]
fn circle_energy_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = elastica(&["--out", out.to_str().unwrap(), "flow", "--loop", "circle", "--steps", "0"]);
    assert!(o.status.success());
    let m = manifest(&out);
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["config"]["command"], "flow");
    assert!((m["results"]["energy"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(out.join("diagnostics.csv").exists());
}

#[test]
fn genus3_suite_passes() {
    let o = elastica(&["verify", "--suite", "genus3", "--points", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("15/15 checks pass"));
}

#[test]
fn bad_configuration_exits_2() {
    assert_eq!(elastica(&["flow", "--n", "100"]).status.code(), Some(2));
    assert_eq!(elastica(&["psdo", "--power", "2"]).status.code(), Some(2));
    assert_eq!(elastica(&["spectrum", "--potential", "nowhere"]).status.code(), Some(2));
    assert_eq!(elastica(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn missing_curve_file_is_a_config_error() {
    let o = elastica(&["curve", "--curve", "/nonexistent/curve.json"]);
    assert_eq!(o.status.code(), Some(2));
}

fn random_flow(out: &Path) {
    let o = elastica(&[
        "--out",
        out.to_str().unwrap(),
        "flow",
        "--loop",
        "random",
        "--n",
        "64",
        "--steps",
        "200",
        "--save-every",
        "50",
        "--frames",
        "--seed",
        "7",
    ]);
    assert!(o.status.success());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    random_flow(&a);
    random_flow(&b);
    for name in ["manifest.json", "diagnostics.csv", "frames.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn replay_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = elastica(&[
        "--out",
        a.to_str().unwrap(),
        "--format",
        "json",
        "spectrum",
        "--potential",
        "builtin:lame",
        "--from",
        "-2",
        "--to",
        "16",
        "--points",
        "60",
        "--edges",
    ]);
    assert!(o.status.success());
    let m = a.join("manifest.json");
    let o = elastica(&["--out", b.to_str().unwrap(), "replay", "--manifest", m.to_str().unwrap()]);
    assert!(o.status.success());
    for name in ["manifest.json", "scan.json", "edges.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_eq!(manifest(&b)["results"]["simple_edges"].as_array().unwrap().len(), 3);
}

#[test]
fn replay_rejects_unknown_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    fs::write(&path, r#"{"schema_version": 99}"#).unwrap();
    let o = elastica(&["replay", "--manifest", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
