use std::path::PathBuf;

use nconn::harness::emit::{points_csv, summary_csv};
use nconn::harness::{run, to_json, with_jobs, Command, HarnessError, ModelFile, RunOptions, Status};

fn model(name: &str) -> ModelFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    ModelFile::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn json(text: &str) -> ModelFile {
    ModelFile::from_json(text).unwrap()
}

fn opts(grid: &str) -> RunOptions {
    RunOptions {
        grid: Some(grid.to_string()),
        ..RunOptions::default()
    }
}

#[test]
fn flat_residuals_vanish() {
    let r = run(Command::Residuals, model("flat.json"), &RunOptions::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.points, 125);
    assert!(r.equations.iter().all(|e| e.max == 0.0));
}

#[test]
fn vacuum_ansatz_verifies() {
    let r = run(Command::AnsatzVerify, model("vacuum.json"), &RunOptions::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.points, 17 * 17 * 17);
    assert!(r.details["max_relative"].as_f64().unwrap() < 1e-8);
    assert_eq!(r.domain.failed(), 0);
}

#[test]
fn unknown_identifier_is_an_input_error() {
    let f = json(r#"{"ansatz": {"h5": "v^2 + x9"}}"#);
    let e = run(Command::Check, f, &RunOptions::default()).unwrap_err();
    assert!(matches!(&e, HarnessError::Expression { section, .. } if section == "ansatz.h5"));
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("x9"), "{e}");
    assert_eq!(e.diagnostic()["error"]["kind"], "expression");
}

#[test]
fn schema_violations_are_rejected() {
    assert!(ModelFile::from_json(r#"{"metrik": {}}"#).is_err());
    let e = run(Command::Check, json(r#"{"schema": 9}"#), &RunOptions::default()).unwrap_err();
    assert!(matches!(e, HarnessError::Schema(_)));
    let e = run(Command::Check, json(r#"{"tolerances": {"speed": 1}}"#), &RunOptions::default());
    assert!(e.is_err());
    let e = run(Command::Residuals, json("{}"), &RunOptions::default()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn same_model_and_seed_give_identical_json() {
    let o = opts("random=40");
    let a = to_json(&run(Command::AnsatzVerify, model("vacuum.json"), &o).unwrap());
    let b = to_json(&run(Command::AnsatzVerify, model("vacuum.json"), &o).unwrap());
    assert_eq!(a, b);
    let mut o2 = o.clone();
    o2.seed = Some(99);
    let c = to_json(&run(Command::AnsatzVerify, model("vacuum.json"), &o2).unwrap());
    assert_ne!(a, c);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    for command in [Command::Solve, Command::Residuals, Command::AnsatzVerify] {
        let go = |jobs| {
            with_jobs(Some(jobs), || {
                let r = run(command, model("vacuum.json"), &opts("count=9")).unwrap();
                (to_json(&r), points_csv(&r.table))
            })
        };
        assert_eq!(go(1), go(4), "{}", command.name());
    }
}

#[test]
fn empty_grid_gives_a_valid_report() {
    let r = run(Command::Residuals, model("flat.json"), &opts("count=0")).unwrap();
    assert_eq!(r.points, 0);
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.domain.fraction, 0.0);
    assert!(r.equations.iter().all(|e| e.worst.is_none()));
    let csv = points_csv(&r.table);
    assert_eq!(csv.iter().filter(|&&b| b == b'\n').count(), 1);
    let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
    assert_eq!(v["points"], 0);
}

#[test]
fn csv_has_one_row_per_point_and_component() {
    let r = run(Command::Residuals, model("flat.json"), &opts("count=32")).unwrap();
    assert_eq!(r.points, 32 * 32 * 32);
    let components: usize = r.equations.iter().map(|e| e.components).sum();
    assert_eq!(components, 9);
    let csv = points_csv(&r.table);
    let mut rd = csv::Reader::from_reader(csv.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), ["index", "x1", "x2", "y1", "column", "value"]);
    assert_eq!(rd.records().count(), 32768 * components);
    let summary = summary_csv(&r);
    assert_eq!(summary.iter().filter(|&&b| b == b'\n').count(), 1 + r.equations.len());
}

#[test]
fn tolerance_failure_exits_one() {
    let mut o = RunOptions::default();
    o.tolerances.push(("residual".into(), 1e-3));
    let f = json(
        r#"{"chart": {"horizontal": ["x1", "x2"], "vertical": ["y"]},
            "metric": {"g": [["1", "0"], ["0", "sin(x1)^2"]], "h": [["1"]]},
            "grid": {"ranges": {"x1": [0.5, 1.5]}, "counts": {"x1": 5}}}"#,
    );
    let r = run(Command::Residuals, f, &o).unwrap();
    assert_eq!(r.status, Status::ToleranceFailure);
    assert_eq!(r.exit_code(), 1);
    let w = r.equations[0].worst.as_ref().unwrap();
    assert_eq!(w.point.len(), 3);
    // G^y_y = −R/2 = 1 on the unit sphere
    assert!((r.equations[0].max - 1.0).abs() < 1e-12);
    assert!(w.value.abs() >= r.equations[0].max - 1e-15);
}

#[test]
fn domain_failures_exit_three() {
    let f = json(
        r#"{"chart": {"horizontal": ["x"], "vertical": ["y"]},
            "metric": {"g": [["x"]], "h": [["1"]]},
            "grid": {"ranges": {"x": [-1, 1]}, "counts": {"x": 5}}}"#,
    );
    let r = run(Command::Geometry, f, &RunOptions::default()).unwrap();
    assert_eq!(r.domain.singular, 1);
    assert!(r.domain.exceeded);
    assert_eq!(r.status, Status::DomainFailure);
    assert_eq!(r.exit_code(), 3);
    assert_eq!(r.domain.examples[0].point, vec![0.0, 0.0]);
}

#[test]
fn geometry_dumps_requested_components() {
    let r = run(Command::Geometry, model("flat.json"), &opts("count=2")).unwrap();
    let names: Vec<&str> = r.equations.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["g", "Gamma", "Ric"]);
    assert_eq!(r.equations[0].components, 9);
    assert_eq!(r.equations[0].max, 1.0);
    assert_eq!(r.equations[1].max, 0.0);
    assert_eq!(r.table.rows.len(), 8);
}

#[test]
fn lc_compare_on_product_metric() {
    let r = run(Command::LcCompare, model("product.json"), &RunOptions::default()).unwrap();
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.details["also_solves_lc"], true);
}

#[test]
fn solve_reports_provenance_and_tables() {
    let r = run(Command::Solve, model("ode.json"), &RunOptions::default()).unwrap();
    assert!(r.pass);
    assert_eq!(r.details["provenance"]["h5"], "ode-integrated");
    assert_eq!(r.details["bundle_status"], "unverified");
    assert_eq!(r.artifacts.len(), 1);
    assert_eq!(r.artifacts[0].rows.len(), 9 * 33);
    // e^{2v}
    for row in &r.artifacts[0].rows {
        assert!((row[4] - (2.0 * row[3]).exp()).abs() < 1e-8);
    }

    let r = run(Command::Solve, model("vacuum.json"), &opts("count=5")).unwrap();
    assert!(r.pass);
    assert_eq!(r.details["bundle_status"], "verified");
    assert_eq!(r.details["provenance"]["h4"], "closed-form");

    let r = run(Command::Solve, model("conformal.json"), &RunOptions::default()).unwrap();
    assert!(r.pass, "{:?}", r.details["failures"]);
    assert_eq!(r.details["provenance"]["g2"], "relaxed");
}

#[test]
fn check_summarises_the_model() {
    let r = run(Command::Check, model("vacuum.json"), &RunOptions::default()).unwrap();
    assert!(r.pass);
    assert_eq!(r.details["grid_points"], 4913);
    assert_eq!(r.points, 0);
}

#[test]
fn timing_is_opt_in() {
    let r = run(Command::Check, model("flat.json"), &RunOptions::default()).unwrap();
    assert!(!to_json(&r).contains("runtime"));
    let o = RunOptions {
        timing: true,
        ..RunOptions::default()
    };
    let r = run(Command::Check, model("flat.json"), &o).unwrap();
    assert!(r.runtime_seconds.is_some());
}
