use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbit-thermo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn check_sl2_and_su2() {
    let sl2 = json(&bin(&["check", "catalog:sl2"]));
    assert_eq!(sl2["schema"], 1);
    assert_eq!(sl2["roots"]["roots"].as_array().unwrap().len(), 2);
    let su2 = json(&bin(&["check", "catalog:su2"]));
    assert_eq!(su2["weyl_order"], 2);
}

#[test]
fn check_from_exported_file() {
    let out = bin(&["export", "catalog:osc"]);
    let f = write_temp(&String::from_utf8(out.stdout).unwrap());
    let report = json(&bin(&["check", f.path().to_str().unwrap()]));
    assert_eq!(report["dim"], 4);
    assert_eq!(report["center_dim"], 1);
}

#[test]
fn malformed_input_exits_one() {
    let f = write_temp("{\n  \"name\": \"x\",\n  \"dim\": oops\n}");
    let out = bin(&["check", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let f = write_temp(r#"{"name":"x","dim":2,"basis":["a","b"],"structure":[[1,0,0,1.0]]}"#);
    let out = bin(&["check", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("structure[0]"));
}

#[test]
fn classify_verdicts() {
    let sl2 = json(&bin(&["classify", "catalog:sl2", "--functional", "0,0.5,-0.5"]));
    assert_eq!(sl2["gibbs_exists"], true);
    assert_eq!(sl2["lambda_status"], "InCminStar");
    let su2 = json(&bin(&["classify", "catalog:su2", "--functional", "0.3,-1,2"]));
    assert_eq!(su2["gibbs_exists"], true);
    assert_eq!(su2["omega_description"]["whole_algebra"], true);
    let mot2 = json(&bin(&["classify", "catalog:mot2", "--functional", "1,0,0"]));
    assert_eq!(mot2["gibbs_exists"], false);
    assert_eq!(mot2["admissible"]["cone_potential"], false);
}

#[test]
fn classify_is_deterministic() {
    let a = bin(&["classify", "catalog:so12", "--functional", "1,0.3,0.1", "--seed", "9"]);
    let b = bin(&["classify", "catalog:so12", "--functional", "1,0.3,0.1", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn partition_methods_agree() {
    let z = |method: &str| {
        let r = json(&bin(&["partition", "--family", "sl2-hyperboloid:1", "--at", "1,0,0", "--method", method]));
        r["rows"][0]["Z"].as_f64().unwrap()
    };
    let catalog = z("catalog");
    let dh = json(&bin(&["partition", "--family", "sl2-hyperboloid:1", "--at", "1,0,0", "--method", "dh"]));
    assert_eq!(dh["partial_roots"], serde_json::json!([]));
    assert!((catalog - (-1.0f64).exp()).abs() < 1e-12);
    assert!((z("dh") - catalog).abs() < 1e-9 * catalog);
    assert!((z("quad") - catalog).abs() < 1e-6 * catalog);
}

#[test]
fn partition_divergent_point() {
    let r = json(&bin(&["partition", "--family", "sl2-hyperboloid:1", "--at", "-1,0,0"]));
    assert_eq!(r["rows"][0]["divergent"], true);
    assert!(r["rows"][0]["Z"].is_null());
}

#[test]
fn partition_csv_grid() {
    let f = write_temp("x0,x1,x2\n0,0,1\n0,0,2\n");
    let out = bin(&["partition", "--family", "su2:1", "--grid", f.path().to_str().unwrap(), "--output", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("x0,x1,x2,Z,logZ,Q0"));
}

#[test]
fn verify_default_grid_passes() {
    let out = bin(&["verify", "--family", "sl2-nilpotent", "--output", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn verify_rejects_small_sample_counts() {
    let out = bin(&["verify", "--family", "su2:1", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scan_and_expect() {
    let out = bin(&["scan", "--family", "sl2-hyperboloid:1", "--grid", "-1,0,0;-0.1,0,0;0.1,0,0;1,0,0"]);
    let r = json(&out);
    assert_eq!(r["mismatches"], 0);

    let good = write_temp(r#"{"mismatches": 0, "schema": 1}"#);
    let out = bin(&["scan", "--family", "sl2-hyperboloid:1", "--grid", "1,0,0", "--expect", good.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let bad = write_temp(r#"{"gibbs_exists": true}"#);
    let out = bin(&["classify", "catalog:so12", "--functional", "0,1,0", "--expect", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // output is still printed in full
    assert!(serde_json::from_slice::<Value>(&out.stdout).is_ok());
}

#[test]
fn legendre_reports() {
    let r = json(&bin(&["legendre", "--family", "osc:1,1", "--nx", "4", "--norbit", "50"]));
    assert_eq!(r["passed"], true);
    assert!(r["max_center_defect"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn thread_cap_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_orbit-thermo"))
        .args(["verify", "--family", "su2:1"])
        .env("ORBIT_THERMO_THREADS", "1")
        .output()
        .unwrap();
    let capped: Value = serde_json::from_slice(&out.stdout).unwrap();
    let free = json(&bin(&["verify", "--family", "su2:1"]));
    assert_eq!(capped, free);
}
