use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn jlm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jlm"))
        .args(args)
        .output()
        .expect("spawn jlm")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = jlm(args);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}\nstderr: {}", String::from_utf8_lossy(&out.stderr)));
    (v, out.status.code().unwrap())
}

fn check<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn envelope_has_schema_and_settings() {
    let (v, code) = json(&["lagrangians", "--seed", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["command"], "lagrangians");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["k"], 1.0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["tolerances"]["el"], 1e-8);
}

#[test]
fn noether_counts() {
    let (v, _) = json(&["lagrangians"]);
    assert_eq!(v["report"]["noether_counts"], serde_json::json!([5, 3, 3, 2]));
}

#[test]
fn tightened_tolerance_fails_with_exit_one() {
    let (v, code) = json(&["lagrangians", "--tolerance", "el=1e-15"]);
    assert_eq!(code, 1);
    assert_eq!(v["pass"], false);
    assert_eq!(v["tolerances"]["el"], 1e-15);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["quantize", "--hamiltonian", "sho", "--scheme", "bogus"][..],
        &["quantize", "--hamiltonian", "morse"],
        &["lagrangians", "--tolerance", "nope=1"],
        &["lagrangians", "--tolerance", "el"],
        &["ladder", "--gauge", "(+ x"],
        &["ladder", "--family", "standard", "--k", "2"],
        &["ladder", "--family", "cubic"],
        &["spectrum", "--nodes", "3"],
        &["nonsense"],
    ] {
        let out = jlm(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn json_is_byte_identical_across_runs() {
    let a = jlm(&["ladder", "--n", "2"]).stdout;
    let b = jlm(&["ladder", "--n", "2"]).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn weyl_goldstein_operator() {
    let (v, _) = json(&["quantize", "--hamiltonian", "goldstein", "--scheme", "weyl"]);
    let op = &v["report"]["operators"][0];
    assert_eq!(op["scheme"], "weyl");
    assert_eq!(op["x2_coefficient"], 3.0);
    assert_eq!(check(&v, "weyl.printed")["pass"], true);
    assert_eq!(check(&v, "weyl.exponent_imag")["pass"], true);
}

#[test]
fn sho_schemes_coincide() {
    let (v, code) = json(&["quantize", "--hamiltonian", "sho", "--k", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["operators"].as_array().unwrap().len(), 3);
    assert_eq!(check(&v, "schemes_coincide")["pass"], true);
}

#[test]
fn ladder_eigenvalues_scale_with_k() {
    for (k, unit) in [("1", 1.0), ("2", 2.0)] {
        let (v, code) = json(&["ladder", "--n", "2", "--k", k]);
        assert_eq!(code, 0, "k = {k}");
        let entries = v["report"]["ladder"]["entries"].as_array().unwrap();
        assert_eq!(entries.len(), 3);
        for (j, e) in entries.iter().enumerate() {
            let re = e["eigenvalue"][0].as_f64().unwrap();
            assert!((re - (j as f64 + 0.5) * unit).abs() < 1e-12, "k = {k}, j = {j}: {re}");
        }
    }
}

#[test]
fn text_format_lists_checks() {
    let out = jlm(&["spectrum", "--format", "text", "--count", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    assert!(s.contains("all checks pass"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = jlm(&["spectrum", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], "1");
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let s = std::fs::read_to_string(path).unwrap();
    let mut lines = s.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn trajectory_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = jlm(&["hamiltonians", "--trajectory-csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, "t,u1,u2");
    assert_eq!(rows.len(), 10_001);
    for r in rows.iter().step_by(997) {
        // H12 trajectory from (1, 0): u1 = cos t
        assert!((r[1] - r[0].cos()).abs() < 1e-9, "{r:?}");
        assert!((r[2] + r[0].sin()).abs() < 1e-9, "{r:?}");
    }
    let raw = std::fs::read_to_string(&path).unwrap();
    let field = raw.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn residual_csv_is_small_for_ladder_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("res.csv");
    let out = jlm(&["ladder", "--n", "2", "--residual-csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, "x,t,|residual|");
    assert_eq!(rows.len(), 41 * 11);
    assert!(rows.iter().all(|r| r[2] >= 0.0 && r[2] < 1e-9));
}

#[test]
fn verify_flags_misprinted_generator_only() {
    let (v, code) = json(&["verify-symmetries"]);
    assert_eq!(code, 1);
    let failing: Vec<_> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failing, ["standard.generators"]);
    assert!(check(&v, "standard.generators")["detail"]
        .as_str()
        .unwrap()
        .contains("G1-"));
}
