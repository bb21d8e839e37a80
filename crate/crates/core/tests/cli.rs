use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectral-nest"));
    c.env_remove("SPECTRAL_NEST_OUT");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const JORDAN: &str = r#"{"dim":2,"entries":[[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]]}"#;
const UPPER: &str = r#"{"dim":2,"entries":[[1.0,0.0],[1.0,0.0],[0.0,0.0],[2.0,0.0]]}"#;

#[test]
fn missing_input_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["decompose", "--in", "absent.json", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn malformed_input_and_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", r#"{"dim":2,"entries":[[1.0,0.0]]}"#);
    let out = run(dir.path(), &["brown", "--in", "bad.json", "--out", "d.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(serde_json::from_slice::<Value>(&out.stderr).unwrap()["error"].is_string());
    assert!(!dir.path().join("d.csv").exists());

    write(dir.path(), "u.json", UPPER);
    let out = run(dir.path(), &["hs", "--in", "u.json", "--ball", "1", "0", "-1", "--out", "p.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("p.json").exists());

    let out = run(dir.path(), &["decompose", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(serde_json::from_slice::<Value>(&out.stderr).unwrap()["error"], "usage");
}

#[test]
fn jordan_block_has_zero_normal_part() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "j.json", JORDAN);
    let out = run(dir.path(), &["decompose", "--in", "j.json", "--out", "r.json", "--report", "conv.csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["schemaVersion"], 1);
    let entries = |key: &str| -> Vec<f64> {
        r[key]["entries"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|z| z.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
            .collect()
    };
    assert!(entries("N").iter().all(|x| x.abs() < 1e-14));
    let q = entries("Q");
    let input = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    assert!(q.iter().zip(input).all(|(a, b)| (a - b).abs() < 1e-14));
    assert!(dir.path().join("conv.csv.config.json").exists());
}

#[test]
fn weyl_check_on_upper_triangular() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", UPPER);
    let out = run(dir.path(), &["check", "weyl", "--in", "u.json", "--gauges", "pow:2", "--out", "w.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let row = csv
        .lines()
        .find(|l| l.starts_with("weyl-inequality"))
        .expect("inequality row");
    let f: Vec<&str> = row.split(',').collect();
    let (lhs, rhs): (f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
    assert!((lhs - 2.5).abs() < 1e-12 && (rhs - 3.0).abs() < 1e-12);
    assert_eq!(f[6], "true");
}

#[test]
fn generated_ensembles_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let out = run(dir.path(), &["gen", "--kind", "ginibre", "--n", "4", "--seed", "5", "--count", "3", "--out", d]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["m0000.json", "m0002.json", "ensemble.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.json", UPPER);
    let out = bin()
        .current_dir(dir.path())
        .env("SPECTRAL_NEST_OUT", dir.path().join("outs"))
        .args(["brown", "--in", "u.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("outs").join("density.csv").exists());
}
