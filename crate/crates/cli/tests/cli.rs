use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wignerlab::io::write_phase_space;
use wignerlab::{make_grid, Complex64, PhaseSpaceFunction};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wignerlab"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("WIGNERLAB_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn wigner_of_ground_state_peaks_at_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["wigner", "--state", "hermite:0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("wigner-summary.json"));
    assert!((num(&s["sup"]) - 2.0).abs() < 1e-9);
    assert!((num(&s["value_at_origin"]) - 2.0).abs() < 1e-9);
    assert!((num(&s["purity"]) - 1.0).abs() < 1e-9);
    assert!((num(&s["integral"]) - 1.0).abs() < 1e-9);
    assert_eq!(s["certificate"], "pass");
    let cert = json(&dir.path().join("wigner-certificate.json"));
    assert_eq!(cert["verdict"], "Pass");
    assert!(dir.path().join("wigner.csv").exists());
    assert!(dir.path().join("wigner.json").exists());
}

#[test]
fn first_excited_state_has_minimum_minus_two_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["wigner", "--state", "hermite:1"]);
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("wigner-summary.json"));
    assert!((num(&s["min"]) + 2.0).abs() < 1e-9);
    assert_eq!(s["min_at"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn equal_mixture_has_purity_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let mixture = dir.path().join("half01.json");
    std::fs::write(&mixture, r#"{"weights":[0.5,0.5],"states":["hermite:0","hermite:1"]}"#).unwrap();
    let spec = format!("mixture:{}", mixture.display());
    let o = run(dir.path(), &["wigner", "--state", &spec]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("wigner-summary.json"));
    assert!((num(&s["purity"]) - 0.5).abs() < 1e-9);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(&run(d.path(), &["--grid-points", "64", "wigner", "--state", "hermite:2"])), 0);
        assert_eq!(code(&run(d.path(), &["polylemma", "--random", "5", "--mode", "fromB", "--seed", "9"])), 0);
    }
    for f in ["wigner.csv", "wigner.json", "wigner-certificate.json", "wigner-summary.json", "polylemma.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn output_directory_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wignerlab"))
        .args(["--grid-points", "64", "wigner", "--state", "gaussian"])
        .env("WIGNERLAB_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("wigner-summary.json").exists());
}

fn certify_map(dir: &Path, spec: &str) -> (i32, Value) {
    let path = dir.join("map.json");
    std::fs::write(&path, spec).unwrap();
    let o = run(dir, &["certify-map", "--map", path.to_str().unwrap()]);
    (code(&o), json(&dir.join("map-verdict.json")))
}

#[test]
fn certify_map_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (c, v) = certify_map(dir.path(), r#"{"kind":"affine","M":[[0,1],[-1,0]],"a":[0,0]}"#);
    assert_eq!(c, 0);
    assert_eq!(v["verdict"]["tag"], "Admissible");
    assert_eq!(v["verdict"]["class"], "Symplectic");

    let (c, v) = certify_map(dir.path(), r#"{"kind":"affine","M":[[2,0],[0,2]],"a":[0,0]}"#);
    assert_eq!(c, 10);
    assert_eq!(v["verdict"]["witness"]["reason"], "PositivityFailure");
    assert_eq!(v["rechecked"], true);
    assert!(v["recheck"].is_string());

    let (c, v) = certify_map(dir.path(), r#"{"kind":"named","family":"poly_shear","params":[0.5]}"#);
    assert_eq!(c, 10);
    assert_eq!(v["verdict"]["witness"]["reason"], "HudsonFailure");
}

#[test]
fn certify_state_rejects_sub_heisenberg_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let grid = make_grid(1, 128, 1.0 / 8.0).unwrap();
    let f = PhaseSpaceFunction::from_fn(&grid, |z| {
        Complex64::new(8.0 * (-8.0 * std::f64::consts::PI * (z[0] * z[0] + z[1] * z[1])).exp(), 0.0)
    })
    .unwrap();
    let path = dir.path().join("narrow.csv");
    write_phase_space(&path, &f).unwrap();
    let o = run(dir.path(), &["certify-state", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 10);
    let cert = json(&dir.path().join("certificate.json"));
    assert!(num(&cert["min_eigenvalue"]) < -0.5);

    let o = run(dir.path(), &["--grid-points", "128", "certify-state", "--state", "hermite:1"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn harness_suites_pass_and_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["harness", "moyal"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = json(&dir.path().join("harness-moyal.json"));
    let rows = rep["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["passed"] == true && num(&r["measured"]) <= num(&r["threshold"])));

    let o = run(dir.path(), &["harness", "cohen-defect", "--kernel", "gaussian"]);
    assert_eq!(code(&o), 0);
    let rep = json(&dir.path().join("harness-cohen-defect.json"));
    let rows = rep["rows"].as_array().unwrap();
    let name = |r: &Value| r["name"].as_str().unwrap().to_string();
    for r in rows.iter().filter(|r| name(r).starts_with("defect delta")) {
        assert!(num(&r["measured"]) < 1e-5);
    }
    assert!(rows
        .iter()
        .any(|r| name(r).starts_with("defect gaussian(1) shear") && num(&r["measured"]) > 1e-2));
}

#[test]
fn cohen_writes_transform_and_defects() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["cohen", "--state", "hermite:0", "--kernel", "gaussian"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&dir.path().join("cohen-report.json"));
    // Husimi value of the ground state at the origin is 1.
    assert!((num(&rep["value_at_origin"][0]) - 1.0).abs() < 1e-6);
    assert_eq!(rep["defects"].as_array().unwrap().len(), 5);
    assert!(dir.path().join("cohen.csv").exists());
}

#[test]
fn polylemma_classifies_irreducible_triple() {
    let dir = tempfile::tempdir().unwrap();
    let p = r#"{"c":"1","b":["0"],"A":[["1"]]}"#;
    let path = dir.path().join("triple.json");
    std::fs::write(&path, format!(r#"{{"F":{p},"G":{p},"H":{p}}}"#)).unwrap();
    let o = run(dir.path(), &["polylemma", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&dir.path().join("polylemma.json"));
    assert_eq!(v["consistent"], true);
    assert_eq!(v["case_A_possible"], false);
    assert_eq!(v["case_B_possible"], true);
    assert_eq!(v["ratio"], serde_json::json!(["1", "-1"]));
}

#[test]
fn config_and_numerical_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["wigner", "--state", "bogus"])), 2);
    assert_eq!(code(&run(dir.path(), &["--grid-points", "3", "wigner", "--state", "gaussian"])), 2);
    assert_eq!(code(&run(dir.path(), &["harness", "nonsense"])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(dir.path(), &["certify-map", "--map", missing.to_str().unwrap()])), 2);

    assert_eq!(code(&run(dir.path(), &["--grid-points", "64", "wigner", "--state", "gaussian"])), 0);
    let csv = dir.path().join("wigner.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let fields: Vec<&str> = lines[1].split(',').collect();
    lines[1] = format!("{},{},NaN,{}", fields[0], fields[1], fields[3]);
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["certify-state", "--input", csv.to_str().unwrap()])), 3);
}
