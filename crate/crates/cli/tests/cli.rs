use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn hacs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hacs"))
        .args(args)
        .output()
        .expect("run hacs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--json", &p]);
    let o = hacs(&full);
    let text =
        fs::read_to_string(&path).unwrap_or_else(|_| panic!("no report: {}", String::from_utf8_lossy(&o.stderr)));
    (code(&o), serde_json::from_str(&text).unwrap())
}

fn decompose_text(text: &str) -> (i32, Option<Value>) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    fs::write(&path, text).unwrap();
    let o = hacs(&["decompose", "--file", path.to_str().unwrap()]);
    let v = serde_json::from_slice(&o.stdout).ok();
    (code(&o), v)
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

fn frob(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn list_shows_every_model() {
    let o = hacs(&["list"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    for id in harmonic_ids() {
        assert!(out.contains(id), "missing {id}");
    }
}

fn harmonic_ids() -> [&'static str; 8] {
    [
        "sasakian-sphere",
        "ellipsoid-c2",
        "nearly-cosymplectic-s5",
        "nearly-sasakian-s5",
        "kenmotsu-warped",
        "cosymplectic-flat",
        "nil3",
        "product-line",
    ]
}

#[test]
fn verify_sasakian_five_sphere_matches() {
    let (c, v) = run_json(&["verify", "sasakian-sphere", "--n", "2", "--points", "6"]);
    assert_eq!(c, 0);
    for key in [
        "model_id",
        "config",
        "per_point",
        "maxima",
        "verdicts",
        "expected",
        "match",
    ] {
        assert!(v.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(v["match"], Value::Bool(true));
    assert_eq!(v["verdicts"]["harmonic_map"], Value::Bool(true));
    assert_eq!(v["per_point"].as_array().unwrap().len(), 6);
}

#[test]
fn verify_nearly_sasakian_slice_is_not_harmonic() {
    let (c, v) = run_json(&["verify", "nearly-sasakian-s5", "--points", "4"]);
    assert_eq!(c, 0);
    assert_eq!(v["verdicts"]["harmonic_section"], Value::Bool(false));
    assert_eq!(v["verdicts"]["xi_harmonic"], Value::Bool(true));
    assert!(v["maxima"]["tau_bar_norm"].as_f64().unwrap() > 0.1);
}

#[test]
fn impossible_tolerance_is_a_mismatch() {
    let (c, v) = run_json(&["verify", "sasakian-sphere", "--points", "4", "--tol", "1e-30"]);
    assert_eq!(c, 1);
    assert_eq!(v["match"], Value::Bool(false));
}

#[test]
fn fd_backend_agrees_on_kenmotsu() {
    let (c, v) = run_json(&["verify", "kenmotsu-warped", "--points", "4", "--backend", "fd"]);
    assert_eq!(c, 0);
    assert_eq!(v["config"]["backend"], Value::String("fd".into()));
    assert_eq!(v["verdicts"]["harmonic_map"], Value::Bool(false));
}

#[test]
fn invalid_inputs_exit_with_two() {
    assert_eq!(code(&hacs(&["verify", "no-such-model"])), 2);
    assert_eq!(code(&hacs(&["verify", "sasakian-sphere", "--n", "0"])), 2);
    assert_eq!(code(&hacs(&["verify", "nil3", "--n", "2"])), 2);
    assert_eq!(code(&hacs(&["verify", "ellipsoid-c2", "--a", "-1"])), 2);
    assert_eq!(code(&hacs(&["verify", "sasakian-sphere", "--tol", "0"])), 2);
    assert_eq!(code(&hacs(&["verify", "sasakian-sphere", "--backend", "spline"])), 2);
    assert_eq!(code(&hacs(&["hypersurface", "kenmotsu-warped"])), 2);
}

#[test]
fn classify_reports_expected_flags() {
    let (c, v) = run_json(&["classify", "kenmotsu-warped", "--points", "4", "--c", "0.5"]);
    assert_eq!(c, 0);
    assert_eq!(v["verdicts"]["beta_kenmotsu"], Value::Bool(true));
    assert_eq!(v["verdicts"]["sasakian"], Value::Bool(false));
    assert!((v["beta"]["mean"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let (c, v) = run_json(&["classify", "sasakian-sphere", "--points", "4"]);
    assert_eq!(c, 0);
    assert_eq!(v["verdicts"]["sasakian"], Value::Bool(true));
    assert_eq!(v["verdicts"]["K_contact"], Value::Bool(true));
}

#[test]
fn hypersurface_report_has_ambient_section() {
    let (c, v) = run_json(&["hypersurface", "nearly-cosymplectic-s5", "--points", "4"]);
    assert_eq!(c, 0);
    let amb = &v["ambient"];
    for key in ["A_norm", "H", "Gamma1_norm", "Gamma2_norm", "ambient_tau_norm"] {
        assert!(amb.get(key).is_some(), "missing ambient key {key}");
    }
    assert!(amb["A_norm"].as_f64().unwrap() < 1e-9);
    assert!((amb["Gamma1_norm"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(v["theorems"]["nearly_kahler_ambient"], Value::Bool(true));
}

#[test]
fn hypersurface_sphere_shape_operator() {
    let (c, v) = run_json(&["hypersurface", "sasakian-sphere", "--points", "4"]);
    assert_eq!(c, 0);
    assert!((v["ambient"]["H"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((v["ambient"]["A_norm"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-9);
}

#[test]
fn decompose_standard_phi_is_pure_h() {
    let (c, v) = decompose_text("0 1 0\n-1 0 0\n0 0 0\n");
    assert_eq!(c, 0);
    let v = v.unwrap();
    assert!(frob(&matrix(&v["m1"])) < 1e-12);
    assert!(frob(&matrix(&v["m2"])) < 1e-12);
    assert!((frob(&matrix(&v["h"])) - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn decompose_xi_column_lands_in_m2() {
    let (c, v) = decompose_text("[[0,0,1],[0,0,0],[-1,0,0]]");
    assert_eq!(c, 0);
    let v = v.unwrap();
    assert!(frob(&matrix(&v["h"])) < 1e-12);
    assert!(frob(&matrix(&v["m1"])) < 1e-12);
    assert!((frob(&matrix(&v["m2"])) - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn decompose_reconstructs_five_by_five() {
    let rows = [
        [0.0, 1.0, -2.0, 0.5, 3.0],
        [-1.0, 0.0, 0.7, -1.5, 0.2],
        [2.0, -0.7, 0.0, 4.0, -0.3],
        [-0.5, 1.5, -4.0, 0.0, 1.1],
        [-3.0, -0.2, 0.3, -1.1, 0.0],
    ];
    let text = rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n");
    let (c, v) = decompose_text(&text);
    assert_eq!(c, 0);
    let v = v.unwrap();
    let (h, m1, m2) = (matrix(&v["h"]), matrix(&v["m1"]), matrix(&v["m2"]));
    for i in 0..5 {
        for j in 0..5 {
            assert!((h[i][j] + m1[i][j] + m2[i][j] - rows[i][j]).abs() < 1e-12);
        }
    }
    assert!(v["reconstruction_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn decompose_rejects_bad_matrices() {
    assert_eq!(decompose_text("0 1\n-1 0\n").0, 2);
    assert_eq!(decompose_text("0 1 0\n1 0 0\n0 0 0\n").0, 2);
    assert_eq!(decompose_text("0 1 0\n-1 0\n").0, 2);
    assert_eq!(decompose_text("0 x 0\n").0, 2);
    assert_eq!(decompose_text("").0, 2);
    assert_eq!(code(&hacs(&["decompose", "--file", "/nonexistent/matrix.txt"])), 2);
}
