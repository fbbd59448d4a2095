use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn due(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_due")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_eta_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = due(&["verify-eta", "--q0", "3", "--out", out]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let doc = read_json(&dir.path().join("verify-eta.json"));
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["report"]["max_abs_sum"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["manifest"]["input_hash"].as_str().unwrap().len(), 64);

    let vacuous = due(&["verify-eta", "--q0", "1"]);
    assert_eq!(code(&vacuous), 0);
    let doc: Value = serde_json::from_slice(&vacuous.stdout).unwrap();
    assert!(doc["report"]["note"].as_str().unwrap().contains("vacuous"));

    let broken = due(&["verify-eta", "--q0", "3", "--delta", "0"]);
    assert_eq!(code(&broken), 2);
    let doc: Value = serde_json::from_slice(&broken.stdout).unwrap();
    assert_eq!(doc["report"]["rho"]["flat_margins"], false);

    assert_eq!(code(&due(&["verify-eta", "--delta", "0.3"])), 1);
    assert_eq!(code(&due(&["verify-eta", "--bogus"])), 1);
}

#[test]
fn nil_construct_runs_and_checks_coprimality() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = due(&["nil-construct", "--grid", "4x2", "--format", "csv", "--out", out]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let csv = fs::read_to_string(dir.path().join("nil-construct.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("element,has_theta,level_0,level_1,level_2,level_3,full_sum"));
    assert_eq!(lines.count(), 32);
    let man = read_json(&dir.path().join("nil-construct.manifest.json"));
    assert_eq!(man["summary"]["qbar"], 128);

    let bad = due(&["nil-construct", "--p", "2"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("not coprime"));
}

#[test]
fn build_loop_is_reproducible_and_feeds_the_compact_certificate() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = due(&["build-loop", "--spins", "1/2", "--m", "2", "--seed", "4", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["build-loop.json", "loop.csv", "loop.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let doc = read_json(&a.path().join("build-loop.json"));
    // the antipodal family: a zero that is not a regular point
    assert_eq!(doc["report"]["zero"]["surjective"], false);
    assert!(doc["report"]["equidistribution"]["max_defect"].as_f64().unwrap() < 1e-10);

    let manifest = a.path().join("loop.json");
    let cc = due(&["compact-certificate", "--loop", manifest.to_str().unwrap(), "--grid", "4x4"]);
    assert_eq!(code(&cc), 0, "{}", String::from_utf8_lossy(&cc.stderr));
    let doc: Value = serde_json::from_slice(&cc.stdout).unwrap();
    assert_eq!(doc["report"]["qbar"], 4);
    assert_eq!(doc["manifest"]["parameters"]["spins"][0], "1/2");

    let coprime = due(&["compact-certificate", "--loop", manifest.to_str().unwrap(), "--p", "2"]);
    assert_eq!(code(&coprime), 1);
    let control = due(&["compact-certificate", "--trivial-loop", "--spins", "1/2", "--m", "2", "--grid", "2x2"]);
    assert_eq!(code(&control), 2);
}

#[test]
fn build_loop_rejects_small_m() {
    let o = due(&["build-loop", "--spins", "1", "--m", "2"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&due(&["build-loop", "--spins", "0"])), 1);
}

#[test]
fn due_diagnostic_tables() {
    let par = due(&["due-diagnostic", "--map", "parabolic", "--truncations", "4,8", "--format", "csv"]);
    assert_eq!(code(&par), 0);
    let text = String::from_utf8(par.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "case,truncation,basis_size,grid_points,rank,sup,rms,warning");
    assert_eq!(rows.len(), 3);
    for r in &rows[1..] {
        let rms: f64 = r.split(',').nth(6).unwrap().parse().unwrap();
        assert!(rms > 0.1);
    }
    let zero = due(&["due-diagnostic", "--phi", "zero", "--truncations", "1", "--grid", "2x2"]);
    assert_eq!(code(&zero), 0);
    let doc: Value = serde_json::from_slice(&zero.stdout).unwrap();
    assert_eq!(doc["report"]["rows"][0]["sup"].as_f64().unwrap(), 0.0);
    let cons = due(&["due-diagnostic", "--phi", "7", "--truncations", "1", "--grid", "4x2"]);
    let doc: Value = serde_json::from_slice(&cons.stdout).unwrap();
    assert!(doc["manifest"]["summary"]["max_sup"].as_f64().unwrap() < 1e-8);
    assert_eq!(code(&due(&["due-diagnostic", "--phi", "999"])), 1);
}
