use std::collections::BTreeSet;

use heatlab_runner::config::SCHEMA_VERSION;
use heatlab_runner::fuzz::fuzz;
use heatlab_runner::report::CSV_HEADER;
use heatlab_runner::{run_scenario, ReportBundle, ReportFile, ScenarioConfig};
use serde_json::Value;

fn quick(tag: &str, audits: &[&str]) -> ScenarioConfig {
    let mut c = ScenarioConfig::catalog(tag);
    c.grid.cells = 64;
    c.audits = Some(audits.iter().map(|s| s.to_string()).collect());
    c
}

fn without_timing(mut bundles: Vec<ReportBundle>) -> Vec<ReportBundle> {
    for b in &mut bundles {
        b.timing_ms = 0.0;
    }
    bundles
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().expect("object").keys().cloned().collect()
}

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn csv_header_is_stable() {
    assert_eq!(CSV_HEADER.join(","), "bound_id,scenario,n_samples,empirical_constant,margin,pass,notes");
    let b = run_scenario(&quick("circle", &["volume-doubling"])).unwrap();
    let csv = ReportFile::new(vec![b]).to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bound_id,scenario,n_samples,empirical_constant,margin,pass,notes"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "volume-doubling");
    assert_eq!(row[1], "circle");
    assert_eq!(row[5], "true");
}

#[test]
fn json_schema_is_stable() {
    let b = run_scenario(&quick("sphere2", &["volume-comparison", "mean-value"])).unwrap();
    let v: Value = serde_json::from_str(&ReportFile::new(vec![b]).to_json()).unwrap();
    assert_eq!(keys(&v), set(&["schema_version", "bundles"]));
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    let b = &v["bundles"][0];
    assert_eq!(keys(b), set(&["schema_version", "scenario", "fingerprint", "reports", "timing_ms"]));
    assert_eq!(keys(&b["fingerprint"]), set(&["version", "cells", "seed", "model", "N", "eps", "K", "hypothesis_holds"]));
    for r in b["reports"].as_array().unwrap() {
        assert_eq!(
            keys(r),
            set(&[
                "bound_id",
                "scenario",
                "samples",
                "empirical_constant",
                "shape_exponents",
                "pass",
                "margin",
                "vacuous",
                "notes"
            ])
        );
        for s in r["samples"].as_array().unwrap() {
            assert_eq!(keys(s), set(&["inputs", "lhs", "rhs"]));
        }
    }
}

#[test]
fn reports_round_trip_and_check_the_version() {
    let b = run_scenario(&quick("interval", &["volume-doubling", "davies-double-integral"])).unwrap();
    let f = ReportFile::new(vec![b]);
    assert_eq!(ReportFile::from_json(&f.to_json()).unwrap(), f);
    let mut v: Value = serde_json::from_str(&f.to_json()).unwrap();
    v["schema_version"] = Value::from(SCHEMA_VERSION + 1);
    assert!(ReportFile::from_json(&v.to_string()).is_err());
}

#[test]
fn identical_runs_give_identical_bytes() {
    let cfg = quick("sphere2-perturbed", &["volume-doubling", "neumann-poincare", "parabolic-harnack"]);
    let a = ReportFile::new(without_timing(vec![run_scenario(&cfg).unwrap()]));
    let b = ReportFile::new(without_timing(vec![run_scenario(&cfg).unwrap()]));
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn fuzz_is_reproducible_from_the_seed() {
    let mut cfg = quick("sphere2-perturbed", &[]);
    cfg.fuzz.audits = Some(vec!["volume-comparison".into(), "volume-doubling".into()]);
    let a = fuzz(&cfg, 4, 17).unwrap();
    let b = fuzz(&cfg, 4, 17).unwrap();
    let c = fuzz(&cfg, 4, 18).unwrap();
    let (a, b, c) = (without_timing(a.bundles), without_timing(b.bundles), without_timing(c.bundles));
    assert_eq!(ReportFile::new(a.clone()).to_json(), ReportFile::new(b).to_json());
    let models = |v: &[ReportBundle]| v.iter().map(|x| x.fingerprint.model.clone()).collect::<Vec<_>>();
    assert_ne!(models(&a), models(&c));
}

#[test]
fn constant_density_sphere_passes_every_audit() {
    let b = run_scenario(&ScenarioConfig::catalog("sphere2-constdensity")).unwrap();
    for r in &b.reports {
        assert!(r.pass && !r.vacuous, "{}: {:?}", r.bound_id, r.notes);
    }
}
