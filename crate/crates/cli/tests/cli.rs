use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.display().to_string()
}

fn rowball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rowball"))
        .args(args)
        .env_remove("ROWBALL_TOL")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = rowball(&full);
    let report = serde_json::from_slice(&out.stdout).expect("report is JSON");
    (report, out.status.code().expect("exit code"))
}

#[test]
fn gamma_of_zero_tuple() {
    let (report, code) = json(&["gamma", &data("zero3.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["command"], "gamma");
    let g = &report["results"][0]["gamma"];
    assert_eq!((g["p"].as_u64(), g["m"].as_u64(), g["q"].as_u64()), (Some(0), Some(1), Some(0)));
    assert_eq!(report["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn infinite_degree_prints_inf() {
    let (report, code) = json(&["gamma", &data("scalar.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["results"][0]["gamma"]["m"], "inf");
}

#[test]
fn check_rejects_non_contraction() {
    let (report, code) = json(&["check", &data("bad.json")]);
    assert_eq!(code, 2);
    let err = &report["results"][0]["error"];
    assert_eq!(err["kind"], "validation");
    assert!(err["message"].as_str().unwrap().contains("row contraction"), "{err}");
}

#[test]
fn malformed_file_names_the_field() {
    let (report, code) = json(&["check", &data("malformed.json")]);
    assert_eq!(code, 2);
    let err = &report["results"][0]["error"];
    assert_eq!(err["kind"], "parse");
    assert!(err["message"].as_str().unwrap().contains("matrices[0]"), "{err}");
}

#[test]
fn worst_exit_code_wins_across_files() {
    let (report, code) = json(&["check", &data("coisometry.json"), &data("bad.json")]);
    assert_eq!(code, 2);
    assert_eq!(report["results"][0]["row_contraction"], true);
    assert!(report["results"][1]["error"].is_object());
}

#[test]
fn reports_are_deterministic() {
    let args = ["--format", "json", "coincide", &data("jordan.json"), &data("jordan.json")];
    let (a, b) = (rowball(&args), rowball(&args));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["results"]["verdict"], "coincide");
}

#[test]
fn parallel_matches_sequential() {
    let files = [data("zero3.json"), data("coisometry.json"), data("jordan.json")];
    let mut seq = vec!["--format", "json", "classify"];
    seq.extend(files.iter().map(|s| s.as_str()));
    let mut par = seq.clone();
    par.push("--parallel");
    assert_eq!(rowball(&seq).stdout, rowball(&par).stdout);
}

#[test]
fn metric_reports_interval_and_euclidean_term() {
    let (report, code) = json(&["aut", "metric", &data("a.aut.json"), &data("b.aut.json"), "--depth", "8"]);
    assert_eq!(code, 0);
    let r = &report["results"];
    let (lo, hi) = (r["d_e"]["lower"].as_f64().unwrap(), r["d_e"]["upper"].as_f64().unwrap());
    let euclid = r["euclidean_term"].as_f64().unwrap();
    assert!(lo <= hi && lo >= euclid - 1e-12, "{r}");
}

#[test]
fn composition_with_inverse_round_trips_through_files() {
    let (report, code) = json(&["aut", "invert", &data("a.aut.json")]);
    assert_eq!(code, 0);
    let inverse = report["results"]["inverse"].clone();
    let path = std::env::temp_dir().join(format!("rowball-inverse-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(&inverse).unwrap()).unwrap();
    let (composed, code) = json(&["aut", "compose", &data("a.aut.json"), path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 0);
    let lambda = composed["results"]["composition"]["lambda"].as_array().unwrap();
    for z in lambda {
        assert!(z[0].as_f64().unwrap().abs() < 1e-9 && z[1].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn model_gamma_agrees_with_structure() {
    let (report, code) = json(&["model", "gamma", &data("shift.model.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["results"]["agree"], true, "{report}");
}

#[test]
fn tolerance_override_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_rowball"))
        .args(["check", &data("zero3.json")])
        .env("ROWBALL_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn text_output_is_default() {
    let out = rowball(&["gamma", &data("jordan.json")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: gamma"), "{text}");
}
