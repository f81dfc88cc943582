use std::path::PathBuf;
use std::process::Command;

use segre_cli::{run_suite, CliError, RunConfig};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// The report with wall-time fields removed.
fn without_wall_time(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn segre_suite_is_exact_and_passes() {
    let r = run_suite("segre", &RunConfig::new("segre")).unwrap();
    assert!(r.pass, "{}", r.summary());
    assert!(r.assertions.iter().all(|a| a.margin.is_none()));
    let detail = |n: &str| r.assertions.iter().find(|a| a.name == n).unwrap().detail.clone();
    assert_eq!(detail("nodes"), "10 nodes");
    assert!(detail("planes").starts_with("15 planes"));
}

#[test]
fn hundred_lines_trials_agree() {
    let mut cfg = RunConfig::new("lines");
    cfg.trials = Some(100);
    let r = run_suite("lines", &cfg).unwrap();
    let row = r.assertions.iter().find(|a| a.name == "construction agreement").unwrap();
    assert!(row.detail.starts_with("100/100 six-line agreements"), "{}", row.detail);
    assert!(r.pass, "{}", r.summary());
}

#[test]
fn every_row_has_an_anchor() {
    let mut cfg = RunConfig::new("invariants");
    cfg.trials = Some(30);
    let r = run_suite("invariants", &cfg).unwrap();
    assert!(r.assertions.iter().all(|a| !a.anchor.is_empty()));
}

#[test]
fn reports_are_deterministic_up_to_wall_time() {
    let mut cfg = RunConfig::new("exceptional");
    cfg.trials = Some(5);
    let a = run_suite("exceptional", &cfg).unwrap().to_json();
    let b = run_suite("exceptional", &cfg).unwrap().to_json();
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    cfg.seed += 1;
    let c = run_suite("exceptional", &cfg).unwrap();
    assert!(c.pass);
}

#[test]
fn fixture_points_replace_random_samples() {
    let mut cfg = RunConfig::new("lines");
    cfg.fixtures = Some(fixture("source_points.txt"));
    let r = run_suite("lines", &cfg).unwrap();
    assert!(r.pass, "{}", r.summary());
    assert!(r.assertions.iter().any(|a| a.detail.starts_with("4/4")));
}

#[test]
fn malformed_fixture_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "# header\n1 2 3 4\n1 2 x 4\n").unwrap();
    let mut cfg = RunConfig::new("lines");
    cfg.fixtures = Some(path);
    match run_suite("lines", &cfg) {
        Err(CliError::Core(segre_core::Error::Fixture { line, .. })) => assert_eq!(line, 3),
        other => panic!("expected a fixture error, got {:?}", other.map(|r| r.pass)),
    }
}

#[test]
fn unknown_suite_is_an_error() {
    assert!(matches!(run_suite("everything", &RunConfig::new("everything")), Err(CliError::UnknownSuite(_))));
}

#[test]
fn tight_tolerance_fails_and_exits_nonzero() {
    let bin = env!("CARGO_BIN_EXE_segre-verify");
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let ok = Command::new(bin).args(["--suite", "segre", "--json"]).arg(&json).status().unwrap();
    assert!(ok.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["suite"], "segre");
    assert_eq!(report["config"]["seed"], 20240601);

    // a Plücker tolerance below rounding error rejects the float line matching
    let fail = Command::new(bin)
        .args(["--suite", "lines", "--trials", "2", "--tol", "plucker=1e-30"])
        .status()
        .unwrap();
    assert_eq!(fail.code(), Some(1));

    let bad = Command::new(bin).args(["--suite", "segre", "--tol", "plucker=-1"]).status().unwrap();
    assert_eq!(bad.code(), Some(2));
}

#[test]
fn degree_report_total() {
    let mut cfg = RunConfig::new("degree-report");
    cfg.trials = Some(1);
    let r = run_suite("degree-report", &cfg).unwrap();
    let degree = r.degree.as_ref().expect("degree section");
    println!("{}", r.summary());
    assert_eq!(degree["total"], 2_074_320, "{}", r.summary());
}
