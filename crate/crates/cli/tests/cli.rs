use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SPHERE: &str = r#"{
    "surface": {"n": 3, "mode": "axisymmetric", "profile": {"type": "sphere", "r0": 1.0}, "grid": {"n_theta": 16}},
    "initial": {"type": "constant_u", "value": 1.0},
    "flow": {"rho_max": 4.0}
}"#;

const PERTURBED: &str = r#"{
    "surface": {"n": 3, "mode": "axisymmetric", "profile": {"type": "perturbed_sphere", "r0": 1.0, "eps": 0.1}, "grid": {"n_theta": 32}},
    "initial": {"type": "zonal_u", "mean": 1.2, "amp": 0.2},
    "flow": {"rho_max": 5.0},
    "directions": {"count": 8}
}"#;

fn run(dir: &Path, args: &[&str], config: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_quasilocal"));
    cmd.args(args);
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn clifford_verify_passes_with_schema() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(dir.path(), &["clifford-verify", "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "quasilocal/clifford-verify/v1");
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    let file: Value = serde_json::from_str(&fs::read_to_string(out.join("clifford.json")).unwrap()).unwrap();
    assert_eq!(file, v);
}

#[test]
fn clifford_rejects_dimension_one() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["clifford-verify"], Some(r#"{"n_min": 1, "n_max": 3}"#));
    assert_eq!(code(&o), 1);
}

#[test]
fn null_decompose_example_and_errors() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["null-decompose"], Some(r#"{"zeta": [1.0, 0.0, 1.0]}"#));
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "quasilocal/null-decompose/v1");
    // n = 2, spatial part (1, 0): a = (0, 1) up to a phase.
    let a = v["a"].as_array().unwrap();
    let modulus = |z: &Value| (z[0].as_f64().unwrap().powi(2) + z[1].as_f64().unwrap().powi(2)).sqrt();
    assert!(modulus(&a[0]) < 1e-12);
    assert!((modulus(&a[1]) - 1.0).abs() < 1e-12);

    let o = run(dir.path(), &["null-decompose"], Some(r#"{"zeta": [0.0, 0.0, 1.0, 2.0]}"#));
    assert_eq!(code(&o), 1);
    let o = run(dir.path(), &["null-decompose"], Some(r#"{"zeta": [0.0, 0.0, 1.0, -1.0]}"#));
    assert_eq!(code(&o), 1);
    let o = run(dir.path(), &["null-decompose"], None);
    assert_eq!(code(&o), 1);
    let o = run(dir.path(), &["null-decompose"], Some("{not json"));
    assert_eq!(code(&o), 1);
}

#[test]
fn spinor_verify_small_sweep() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"n_max": 5, "samples": 50, "dirac": {"n_max": 4, "samples": 5}}"#;
    let o = run(dir.path(), &["spinor-verify", "--seed", "9"], Some(cfg));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "quasilocal/spinor-verify/v1");
    assert_eq!(v["seed"], 9);
}

#[test]
fn flow_on_static_sphere_writes_frozen_header() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(dir.path(), &["flow", "--out", out.to_str().unwrap()], Some(SPHERE));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "quasilocal/flow/v1");
    assert_eq!(v["final_sup_u_minus_1"], 0.0);
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "rho,u_min,u_max,sup_u_minus_1,mass_0,mass_1,mass_2,mass_3,cosh_mass,dmass_fd,dmass_analytic"
    );
    assert!(out.join("flow.json").exists());
}

#[test]
fn nonpositive_mean_curvature_is_invalid() {
    let dir = TempDir::new().unwrap();
    let cfg = SPHERE.replace(r#"{"type": "constant_u", "value": 1.0}"#, r#"{"type": "constant_h", "value": -2.0}"#);
    let o = run(dir.path(), &["flow"], Some(&cfg));
    assert_eq!(code(&o), 1);
}

#[test]
fn field_outside_bounds_is_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let cfg = SPHERE
        .replace(r#""value": 1.0"#, r#""value": 0.02"#)
        .replace(r#""rho_max": 4.0"#, r#""rho_max": 4.0, "u_bounds": [0.05, 2.0]"#);
    let o = run(dir.path(), &["flow"], Some(&cfg));
    assert_eq!(code(&o), 2);
}

#[test]
fn mass_runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let oa = run(dir.path(), &["mass", "--out", a.to_str().unwrap()], Some(PERTURBED));
    let ob = run(dir.path(), &["mass", "--out", b.to_str().unwrap()], Some(PERTURBED));
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["mass.json", "trace.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    }
    let v = stdout_json(&oa);
    assert_eq!(v["schema"], "quasilocal/mass/v1");
    assert!(v["context"]["R1"].as_f64().unwrap() <= v["context"]["R2"].as_f64().unwrap());
    assert_eq!(v["limit"]["classification"], "future-nonspacelike");
}

#[test]
fn geometry_verify_orders_and_violation() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"surface": {"n": 3, "mode": "axisymmetric",
        "profile": {"type": "perturbed_sphere", "r0": 1.0, "eps": 0.1}, "grid": {"n_theta": 32}}, "norm": "linf"}"#;
    let o = run(dir.path(), &["geometry-verify"], Some(cfg));
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "quasilocal/geometry-verify/v1");
    for order in v["position_orders"].as_array().unwrap() {
        assert!((order.as_f64().unwrap() - 2.0).abs() < 0.1);
    }
    let strict = cfg.replace(r#""norm": "linf""#, r#""norm": "linf", "min_order": 3.0"#);
    let o = run(dir.path(), &["geometry-verify"], Some(&strict));
    assert_eq!(code(&o), 3);
}

#[test]
fn unknown_subcommand_is_invalid() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["teleport"], None)), 1);
    assert_eq!(code(&run(dir.path(), &["--help"], None)), 0);
}
