use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn krein_lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krein-lab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn chi_star_context_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = krein_lab(&["chi-star", "--context", "ctx.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let first = json(&out);
    let a = first["param"].as_f64().unwrap();
    assert!((a - 0.280_729_741_8).abs() < 1e-9);
    assert!(first["residual"].as_f64().unwrap() <= 1e-8);

    let again = krein_lab(&["chi-star", "--from", "ctx.json"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert!((json(&again)["param"].as_f64().unwrap() - a).abs() <= 1e-10);

    let v0 = krein_lab(&["inner", "v0", "v0", "--form", "metric_A", "--context", "ctx.json"], dir.path());
    assert_eq!(json(&v0)["value"][0].as_f64(), Some(1.0));

    let chi = krein_lab(&["inner", "chi", "chi", "--form", "metric_B", "--context", "ctx.json"], dir.path());
    assert!((json(&chi)["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);

    std::fs::write(dir.path().join("f.json"), r#"{"family":"gaussian","a":1}"#).unwrap();
    let f = krein_lab(&["inner", "@f.json", "@f.json", "--form", "metric_A", "--context", "ctx.json"], dir.path());
    let v = json(&f);
    assert!(v["value"][0].as_f64().unwrap() > 0.0);
}

#[test]
fn chi_star_without_sign_change() {
    let dir = tempfile::tempdir().unwrap();
    let out = krein_lab(&["chi-star", "--bracket", "1,2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sign change"));
}

#[test]
fn indefinite_gaussian_needs_no_context() {
    let dir = tempfile::tempdir().unwrap();
    let g = r#"{"family":"gaussian","a":5}"#;
    let out = krein_lab(&["inner", g, g, "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let re: f64 = row[1].parse().unwrap();
    assert!((re + 0.229_167_26).abs() < 1e-7);
}

#[test]
fn corrupted_context_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(krein_lab(&["chi-star", "--context", "ctx.json"], dir.path()).status.success());
    let path = dir.path().join("ctx.json");
    let mut record: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    record["chi_star"]["residual"] = 0.1.into();
    std::fs::write(&path, record.to_string()).unwrap();

    let inner = krein_lab(&["inner", "v0", "v0", "--form", "metric_A", "--context", "ctx.json"], dir.path());
    assert_eq!(inner.status.code(), Some(6));

    let verify = krein_lab(&["verify", "--context", "ctx.json"], dir.path());
    assert_eq!(verify.status.code(), Some(1));
    let report = json(&verify);
    assert_eq!(report["passed"], false);
    assert!(report["context_error"].as_str().unwrap().contains("residual"));
}

#[test]
fn unattainable_tolerance_fails_gracefully() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tight.json"), r#"{"quad":{"abs_tol":1e-15,"rel_tol":1e-15}}"#).unwrap();
    let out = krein_lab(&["verify", "--config", "tight.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    let sweep = report["criteria"].as_array().unwrap().iter().find(|c| c["id"] == 6).unwrap();
    assert_eq!(sweep["passed"], false);
    let check = &sweep["checks"][0];
    assert!(check["measured"].as_f64().unwrap() > check["limit"].as_f64().unwrap());
}

#[test]
fn wfunc_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = krein_lab(&["wfunc", "--start", "0.5,0", "--end", "4,0", "--count", "4"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("x0,x1,re_w,im_w,d\n"));
    assert_eq!(text.lines().count(), 5);

    let empty = krein_lab(&["wfunc", "--start", "0,1", "--end", "0,2", "--count", "0"], dir.path());
    assert_eq!(empty.status.code(), Some(0));
    assert!(empty.stdout.is_empty());

    let lightlike = krein_lab(&["wfunc", "--start", "0,1", "--end", "2,1", "--count", "3"], dir.path());
    assert_eq!(lightlike.status.code(), Some(7));
    assert!(String::from_utf8_lossy(&lightlike.stderr).contains("row 1"));
}

#[test]
fn seeded_outputs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["wfunc", "--start", "-3,0.2", "--end", "3,2.9", "--count", "50", "--eps", "1e-3"];
    let a = krein_lab(&args, dir.path());
    let b = krein_lab(&args, dir.path());
    assert_eq!(a.stdout, b.stdout);
}
