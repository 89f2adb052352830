use std::path::Path;
use std::process::{Command, Output};

use heatlab_runner::exit;

fn heatlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatlab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_json_is_a_config_error_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\"schema_version\": 1,\n  \"manifold\": {\"catalog\": \"sphere2\"},,\n}");
    let o = heatlab(&["validate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG_ERROR as i32));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn eps_outside_the_range_names_the_admissible_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "eps.json",
        r#"{"schema_version": 1,
            "manifold": {"n": 2, "domain": {"kind": "pole_cap", "r_max": 3.141592653589793},
                         "warp": "sphere", "density": "0.05*cos(r)"},
            "curvature": {"N": 10, "eps": 2.0}}"#,
    );
    let o = heatlab(&["audit", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG_ERROR as i32));
    // |ε| < √((N-1)/(N-n)) = √(9/8).
    let bound = (9.0f64 / 8.0).sqrt().to_string();
    assert!(stderr(&o).contains(&bound[..6]), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists(), "no reports on a config error");
}

#[test]
fn unknown_tags_and_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatlab(&["validate", "--catalog", "torus"], dir.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG_ERROR as i32));
    let cfg = write(dir.path(), "f.json", r#"{"schema_version": 1, "manifold": {"catalog": "circle"}, "gird": {}}"#);
    let o = heatlab(&["validate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG_ERROR as i32));
    assert!(stderr(&o).contains("gird"));
    let o = heatlab(&["validate", "--catalog", "circle", "--grid", "4"], dir.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG_ERROR as i32));
}

#[test]
fn validate_reports_a_failed_hypothesis_as_an_audit_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatlab(&["validate", "--catalog", "sphere2"], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS as i32));
    let cfg = write(dir.path(), "k.json", r#"{"schema_version": 1, "manifold": {"catalog": "sphere2"}, "curvature": {"K": 5}}"#);
    let o = heatlab(&["validate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(exit::AUDIT_FAILURE as i32));
}

#[test]
fn audit_writes_reports_and_report_converts_them() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatlab(&["audit", "--catalog", "sphere2-constdensity", "--grid", "64", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS as i32), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("o/sphere2-constdensity.csv")).unwrap();
    assert!(csv.starts_with("bound_id,scenario,n_samples,empirical_constant,margin,pass,notes\n"));
    let json = dir.path().join("o/sphere2-constdensity.json");
    let o = heatlab(&["report", "--input", json.to_str().unwrap(), "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS as i32));
    assert_eq!(String::from_utf8_lossy(&o.stdout), csv);
}

#[test]
fn a_failed_report_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatlab(&["audit", "--catalog", "circle", "--format", "json", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS as i32));
    let path = dir.path().join("o/circle.json");
    let src = std::fs::read_to_string(&path).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&src).unwrap();
    v["bundles"][0]["reports"][0]["pass"] = serde_json::Value::Bool(false);
    std::fs::write(&path, v.to_string()).unwrap();
    let o = heatlab(&["report", "--input", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(exit::AUDIT_FAILURE as i32));
}

#[test]
fn kernel_and_spectrum_print_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatlab(&["kernel", "--catalog", "euclidean2", "--t", "1"], dir.path());
    assert_eq!(o.status.code(), Some(exit::PASS as i32));
    let out = String::from_utf8_lossy(&o.stdout);
    let first: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    // Planar heat kernel at the pole: 1/(4πt).
    assert!((first[1] - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-3, "{out}");
    let o = heatlab(&["spectrum", "--catalog", "circle", "--count", "5"], dir.path());
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().count(), 6);
}
