use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chandef::{BlockAlgebra, HermitianMap};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chandef"))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, v: &T) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["report"].clone()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn identity_channel_has_unit_norm() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_json(dir.path(), "id2.json", &HermitianMap::identity(&BlockAlgebra::full(2)));
    let r = report(&run(&["norm", "--family", "cp", "--map", id.to_str().unwrap()]));
    let (lo, hi) = (r["value_lo"].as_f64().unwrap(), r["value_hi"].as_f64().unwrap());
    assert!((lo - 1.0).abs() < 1e-7 && (hi - 1.0).abs() < 1e-7, "[{lo}, {hi}]");
}

#[test]
fn reflexive_deficiency_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let phi = write_json(dir.path(), "phi.json", &HermitianMap::depolarizing(2, 0.3));
    let p = phi.to_str().unwrap();
    let r = report(&run(&["deficiency-post", "--family", "cp", "--phi", p, "--psi", p]));
    assert!(r["result"]["eps_hi"].as_f64().unwrap() <= 1e-7);
    assert_eq!(r["zero"], Value::Bool(true));
}

#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let phi = write_json(dir.path(), "phi.json", &HermitianMap::depolarizing(2, 0.4));
    let psi = write_json(dir.path(), "psi.json", &HermitianMap::identity(&BlockAlgebra::full(2)));
    let args = ["deficiency-pre", "--seed", "9", "--phi", phi.to_str().unwrap(), "--psi", psi.to_str().unwrap()];
    let a = run(&args);
    let b = bin().args(args).env("CHANDEF_THREADS", "1").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_passes() {
    let out = run(&["verify", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["passed"], Value::Bool(true));
}

#[test]
fn ovs_orthant_norms() {
    let dir = tempfile::tempdir().unwrap();
    let sec = serde_json::json!({ "cone": { "generators": [[1.0, 0.0], [0.0, 1.0]] }, "base_functional": [1.0, 1.0] });
    let p = write_json(dir.path(), "sec.json", &sec);
    let r = report(&run(&["ovs", "--section", p.to_str().unwrap(), "--x", "1,-2"]));
    assert!((r["norm"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    assert!((r["dual_norm"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let id = write_json(dir.path(), "id.json", &HermitianMap::identity(&BlockAlgebra::full(2)));
    let target = dir.path().join("report.json");
    let out = run(&["dual-norm", "--map", id.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["command"], "dual-norm");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["norm", "--map", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--map", "/nonexistent/map.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--family", "psd"]).status.code(), Some(2));

    let two = write_json(dir.path(), "two.json", &HermitianMap::identity(&BlockAlgebra::full(2)));
    let three = write_json(dir.path(), "three.json", &HermitianMap::identity(&BlockAlgebra::full(3)));
    let out = run(&["deficiency-post", "--phi", two.to_str().unwrap(), "--psi", three.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let sec = serde_json::json!({ "cone": { "generators": [[1.0, 0.0], [0.0, 1.0]] }, "base_functional": [1.0, 1.0] });
    let p = write_json(dir.path(), "sec.json", &sec);
    assert_eq!(run(&["ovs", "--section", p.to_str().unwrap(), "--x", "1,2,3"]).status.code(), Some(3));
}
