//! End-to-end runs of the binary.
use std::process::Command;

use serde_json::Value;

fn quadlink(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_quadlink")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let (code, out, err) = quadlink(&all);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(quadlink(&["--help"]).0, 0);
    assert_eq!(quadlink(&["--version"]).0, 0);
    assert_eq!(quadlink(&["verify", "--help"]).0, 0);
}

#[test]
fn bad_input_exits_2() {
    for args in [
        &["isotropy", "--field", "GF(6)", "--form", "diag[1]"][..],
        &["isotropy", "--field", "GF(3)((t))", "--form", "diag[1, s]"],
        &["witt", "--field", "GF(3)"],
        &["residue", "--field", "GF(3)(X)", "--form", "diag[1, X]"],
        &["nonsense"],
    ] {
        let (code, out, err) = quadlink(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty() && !err.is_empty(), "{args:?}");
    }
}

#[test]
fn isotropy_and_witt() {
    let v = json(&["isotropy", "--field", "GF(5)((t))", "--form", "diag[1, 1]"]);
    assert_eq!(v["isotropic"], Value::Bool(true));
    let v = json(&["isotropy", "--field", "GF(3)((t))", "--form", "diag[1, 1, t, t]"]);
    assert_eq!(v["isotropic"], Value::Bool(false));
    let (code, out, _) = quadlink(&["witt", "--field", "GF(3)((t))", "--form", "diag[1, 2, t, 2*t, 1+t]"]);
    assert_eq!(code, 0);
    assert!(out.contains('2'), "{out}");
}

#[test]
fn global_isotropy_reports_places() {
    let v = json(&["isotropy", "--field", "GF(3)(X)", "--form", "diag[1, 1, X]"]);
    assert_eq!(v["isotropic"], Value::Bool(false));
    assert!(!v["places"].as_array().unwrap().is_empty());
}

#[test]
fn square_and_residue() {
    let v = json(&["square", "--field", "GF(3)((t))", "--element", "1+t"]);
    assert_eq!(v["square"], Value::Bool(true));
    let (code, out, _) = quadlink(&["residue", "--field", "GF(3)((t))", "--form", "diag[1, t, 2*t]"]);
    assert_eq!(code, 0);
    assert!(!out.is_empty());
}

#[test]
fn pfister_commands() {
    for args in [
        &["pfister-expand", "--field", "GF(3)((t))", "--p1", "<<t; 1]]"][..],
        &["pfister-normalize", "--field", "GF(5)((t))", "--p1", "<<t, 2*t, t^3>>"],
        &["pfister-normalize", "--field", "GF(3)((t))", "--p1", "<<t, 1+t; t]]"],
        &["link", "--field", "GF(3)((t))", "--p1", "<<t; 1]]", "--p2", "<<2*t; 1]]"],
        &["certify", "--field", "GF(3)((t))((u))", "--p1", "<<t, u; 1]]", "--p2", "<<u, t*u; 1]]"],
    ] {
        let (code, out, err) = quadlink(args);
        assert_eq!(code, 0, "{args:?}: {err}");
        assert!(!out.is_empty());
    }
}

#[test]
fn verify_is_deterministic_and_passes() {
    let args = ["verify", "residue-transfer", "--field", "GF(3)((t))", "--samples", "30", "--seed", "11"];
    let (code, a, _) = quadlink(&args);
    let (_, b, _) = quadlink(&args);
    assert_eq!(code, 0);
    assert_eq!(a, b);
    assert!(a.trim_end().ends_with("PASS"), "{a}");
    let v = json(&["verify", "top-linked", "--field", "GF(3)((t))", "--d", "2", "--samples", "20"]);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    assert!(v["elapsed_ms"].is_null());
}
