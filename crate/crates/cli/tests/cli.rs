use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn nconn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nconn"))
        .args(args)
        .env_remove("NCONN_JOBS")
        .output()
        .unwrap()
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("nconn-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn residuals_on_flat_model_pass() {
    let o = nconn(&["residuals", "--model", &model("flat.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "pass");
    assert_eq!(v["equations"][0]["max"], 0.0);
}

#[test]
fn ansatz_verify_on_vacuum_example() {
    let o = nconn(&["ansatz-verify", "--model", &model("vacuum.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["details"]["max_relative"].as_f64().unwrap() < 1e-8);
}

#[test]
fn unknown_identifier_exits_two_with_diagnostic() {
    let d = scratch("x9");
    let path = d.join("bad.json");
    std::fs::write(&path, r#"{"ansatz": {"g2": "1 + x9"}}"#).unwrap();
    let o = nconn(&["check", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "expression");
    assert!(e["error"]["message"].as_str().unwrap().contains("x9"));
}

#[test]
fn missing_model_file_exits_two() {
    let o = nconn(&["check", "--model", "/nonexistent/model.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_override_can_fail_a_run() {
    let o = nconn(&["ansatz-verify", "--model", &model("vacuum.json"), "--grid", "count=5", "--tol", "closed_form=0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_is_identical_across_runs_and_jobs() {
    let m = model("vacuum.json");
    let run = |jobs| nconn(&["solve", "--model", &m, "--grid", "count=9", "--jobs", jobs]).stdout;
    let a = run("1");
    let b = run("4");
    let c = run("4");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(b, c);
    let env = Command::new(env!("CARGO_BIN_EXE_nconn"))
        .args(["solve", "--model", &m, "--grid", "count=9"])
        .env("NCONN_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a);
}

#[test]
fn csv_output_writes_tables() {
    let d = scratch("csv");
    let o = nconn(&[
        "solve",
        "--model",
        &model("ode.json"),
        "--output",
        "csv",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "points.csv", "summary.csv", "h5.csv"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let h5 = std::fs::read_to_string(d.join("h5.csv")).unwrap();
    assert_eq!(h5.lines().count(), 1 + 9 * 33);
}
