use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpn-energy")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn constants_command() {
    let v = json(&["constants", "--n", "2"]);
    assert!((f(&v, "C_n") - 1.0).abs() < 1e-15);
    let v = json(&["constants", "--n", "3"]);
    assert!((f(&v, "C_n") - 3.0 * PI / 4.0).abs() < 1e-14);
    assert!((f(&v, "D_n") - 3.0 * PI / 4.0).abs() < 1e-14);
    assert!((f(&v, "prop5_ratio") - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(run(&["constants", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn energy_command() {
    let v = json(&["energy", "--map", "identity", "--n", "3", "--method", "direct", "--samples", "100000", "--seed", "1"]);
    assert!((f(&v, "value") - 14.8044).abs() <= 3.0 * f(&v, "std_error") + 1e-4);
    assert_eq!(v["method"], "direct");
    assert_eq!(v["samples"], 100000);

    let v = json(&["energy", "--map", "constant", "--n", "4", "--method", "croke", "--samples", "1000"]);
    assert_eq!(f(&v, "value"), 0.0);

    let v = json(&["energy", "--map", "identity", "--n", "4", "--method", "slice", "--k", "2", "--samples", "20000"]);
    // σ(4) = 8π²/3
    assert!((f(&v, "value") - 8.0 * PI * PI / 3.0).abs() <= 3.0 * f(&v, "std_error") + 1e-9);
    assert_eq!(v["method"], "slice(2)");
    assert_eq!(v["k"], 2);

    let v = json(&["energy", "--map", "polar_warp:2", "--n", "3", "--method", "croke", "--samples", "50000", "--seed", "3"]);
    assert!(f(&v, "std_error") > 0.0);

    assert_eq!(run(&["energy", "--map", "unknown", "--n", "3"]).status.code(), Some(2));
    let out = run(&["energy", "--map", "dilation:2", "--n", "3", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("equivariance"));
}

#[test]
fn energy_output_is_reproducible() {
    let args = ["energy", "--map", "polar_warp", "--n", "3", "--samples", "20000", "--seed", "11", "--output", "csv"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("value,std_error,samples,method,map,n,k,seed\n"));
    let c = run(&["energy", "--map", "polar_warp", "--n", "3", "--samples", "20000", "--seed", "12", "--output", "csv"]);
    assert_ne!(text.as_bytes(), c.stdout.as_slice());
}

#[test]
fn deform_command() {
    let out = run(&["deform", "--n", "3", "--t-grid", "1,50", "--samples", "100000", "--output", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rows.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["t", "E_total", "E_cap", "E_retract", "se_total"]);
    let records: Vec<csv::StringRecord> = rows.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), 3);
    let num = |r: &csv::StringRecord, i: usize| r[i].parse::<f64>().unwrap();

    // Θ₁ is the identity: 3σ(3)/4 = 3π²/2
    let t1 = &records[0];
    assert!((num(t1, 1) - 1.5 * PI * PI).abs() <= 3.0 * num(t1, 4) + 1e-9);
    assert_eq!(num(t1, 3), 0.0);

    let limit = &records[2];
    assert_eq!(&limit[0], "limit");
    assert!((num(limit, 1) - 2.0 * PI * PI).abs() < 1e-9);
    assert_eq!(&limit[2], "");

    let t50 = &records[1];
    assert!((num(t50, 1) - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 0.05);
    assert!((num(t50, 1) - num(t50, 2) - num(t50, 3)).abs() < 1e-9);

    assert_eq!(run(&["deform", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn bounds_command() {
    let v = json(&["bounds", "--n", "3", "--area-star", "6.2831853", "--length-star", "3.1415927"]);
    let (lo1, lo2) = (f(&v, "lower_thm1"), f(&v, "lower_thm2"));
    assert!((lo1 - 14.8044).abs() < 1e-4 && (lo2 - 14.8044).abs() < 1e-4);
    assert_eq!(v["pu_consistent"], true);

    let v = json(&["bounds", "--n", "5", "--beta", "10"]);
    let d5 = f(&v, "D_n");
    assert!((f(&v, "lower_prop5") - 10.0 * d5).abs() < 1e-12);
    assert!((f(&v, "upper_prop5") - 16.0 / 15.0 * 10.0 * d5).abs() < 1e-12);
    assert!((v["ratios"]["prop5"].as_f64().unwrap() - 16.0 / 15.0).abs() < 1e-15);

    let v = json(&["bounds", "--n", "2", "--beta", "1"]);
    assert!(v.get("lower_prop5").is_none() && v.get("upper_prop5").is_none());
    assert!(v["prop5_omitted"].is_string());

    assert_eq!(run(&["bounds", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn verify_suites_and_out_path() {
    let out = run(&["verify", "--suite", "constants"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS constants/")).count() >= 5);
    assert!(text.ends_with("0 failed\n"));

    let dir = std::env::temp_dir().join(format!("rpn-energy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bounds.json");
    let out = run(&["bounds", "--n", "4", "--area-star", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["n"], 4);
    std::fs::remove_dir_all(&dir).unwrap();
}
