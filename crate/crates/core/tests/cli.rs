use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use unidisc::matrix::UnitaryMatrix;
use unidisc::protocol::Protocol;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_unidisc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, value: &impl serde::Serialize) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

struct Fixture {
    dir: TempDir,
    identity: PathBuf,
    phase: PathBuf,
    z: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let identity = write(dir.path(), "i.json", &UnitaryMatrix::identity(2));
    let phase = write(dir.path(), "p.json", &UnitaryMatrix::diag_phases(&[0.0, PI / 4.0]));
    let z = write(dir.path(), "z.json", &UnitaryMatrix::pauli_z());
    Fixture { dir, identity, phase, z }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn theta_reports_the_arc() {
    let f = fixture();
    let v = stdout_json(&run(&["theta", "--u1", s(&f.identity), "--u2", s(&f.phase)]));
    assert!((v["theta"].as_f64().unwrap() - PI / 4.0).abs() <= 1e-12);
    assert!(v.get("start_phase").is_some() && v.get("end_phase").is_some());
}

#[test]
fn fidelity_with_oracle() {
    let f = fixture();
    let v = stdout_json(&run(&["fidelity", "--u1", s(&f.identity), "--u2", s(&f.phase), "--oracle"]));
    assert!((v["fidelity"].as_f64().unwrap() - (PI / 8.0).cos()).abs() <= 1e-12);
    assert!(v["difference"].as_f64().unwrap().abs() <= 1e-6);
    let plain = stdout_json(&run(&["fidelity", "--u1", s(&f.identity), "--u2", s(&f.phase)]));
    assert!(plain.get("oracle").is_none());
}

#[test]
fn bound_and_perfect() {
    let v = stdout_json(&run(&["bound", "--theta", "0.1", "--epsilon", "0.25", "--mode", "bounded"]));
    assert_eq!(v["t_lower"], 10);
    assert!((v["raw_value"].as_f64().unwrap() - 10.0).abs() <= 1e-12);
    let v = stdout_json(&run(&["bound", "--theta", "0.2", "--epsilon", "0.6", "--mode", "onesided"]));
    assert_eq!(v["t_lower"], 8);
    let out = run(&["perfect", "--theta", &(PI / 4.0).to_string()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "4");
}

#[test]
fn bad_arguments_exit_nonzero() {
    let out = run(&["bound", "--theta", "0.1", "--epsilon", "0.25", "--mode", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bound", "--theta", "0", "--epsilon", "0.25", "--mode", "bounded"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!run(&["theta", "--u1", "/no/such/file.json", "--u2", "/no/such/file.json"]).status.success());
}

#[test]
fn simulate_identity_versus_z() {
    let f = fixture();
    let probe = json!({"dim": 2, "amplitudes": [[std::f64::consts::FRAC_1_SQRT_2, 0.0], [std::f64::consts::FRAC_1_SQRT_2, 0.0]]});
    let id = UnitaryMatrix::identity(2);
    let protocol = json!({
        "system_dim": 2, "ancilla_dim": 1, "queries": 1,
        "probe": probe, "interleavers": [id, id],
    });
    let p = write(f.dir.path(), "protocol.json", &protocol);
    let v = stdout_json(&run(&["simulate", "--u1", s(&f.identity), "--u2", s(&f.z), "--protocol", s(&p)]));
    assert!(v["final_overlap"].as_f64().unwrap() <= 1e-15);
    assert!(v["helstrom_error"].as_f64().unwrap() <= 1e-12);
    assert!(v["unambiguous_inconclusive"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["distances"].as_array().unwrap().len(), 2);
}

#[test]
fn search_returns_a_valid_protocol() {
    let f = fixture();
    let cfg = write(
        f.dir.path(),
        "search.json",
        &json!({"queries": 2, "restarts": 2, "max_iterations": 10, "step_tolerance": 1e-6, "seed": 3}),
    );
    let v = stdout_json(&run(&["search", "--u1", s(&f.identity), "--u2", s(&f.phase), "--config", s(&cfg)]));
    let protocol: Protocol = serde_json::from_value(v["protocol"].clone()).unwrap();
    assert_eq!(protocol.queries, 2);
    assert!(v["overlap"].as_f64().unwrap() <= v["initial_overlap"].as_f64().unwrap());
}

fn campaign(dir: &Path) -> PathBuf {
    write(
        dir,
        "campaign.json",
        &json!({"instances": 25, "dim": 2, "t_range": [1, 5], "seed": 7, "protocol_source": "random"}),
    )
}

#[test]
fn verify_writes_identical_csv_twice() {
    let f = fixture();
    let cfg = campaign(f.dir.path());
    let a = f.dir.path().join("a.csv");
    let b = f.dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&["verify", "--config", s(&cfg), "--format", "csv", "--output", s(path)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(bytes).unwrap().lines().count(), 26);
}

#[test]
fn verify_seed_override_changes_the_report() {
    let f = fixture();
    let cfg = campaign(f.dir.path());
    let one = run(&["verify", "--config", s(&cfg), "--format", "csv"]);
    let other = run(&["verify", "--config", s(&cfg), "--format", "csv", "--seed", "8"]);
    assert!(one.status.success() && other.status.success());
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn verify_json_parses() {
    let f = fixture();
    let cfg = campaign(f.dir.path());
    let v = stdout_json(&run(&["verify", "--config", s(&cfg)]));
    assert_eq!(v["records"].as_array().unwrap().len(), 25);
    assert_eq!(v["summary"]["violations_lemma2"], 0);
}

#[test]
fn verify_errors_exit_nonzero() {
    let f = fixture();
    let cfg = campaign(f.dir.path());
    let missing = f.dir.path().join("no/such/dir/out.csv");
    let out = run(&["verify", "--config", s(&cfg), "--output", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--config", s(&cfg), "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = write(
        f.dir.path(),
        "bad.json",
        &json!({"instances": 0, "dim": 2, "t_range": [1, 5], "seed": 7, "protocol_source": "random"}),
    );
    assert_eq!(run(&["verify", "--config", s(&bad)]).status.code(), Some(2));
}
