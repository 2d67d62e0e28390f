use std::process::{Command, Output};

fn linhodge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linhodge")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn witten_cap9_matches_golden() {
    for (fmt, file) in [("csv", "witten_cap9.csv"), ("json", "witten_cap9.json")] {
        let o = linhodge(&["witten", "--cap", "9", "--format", fmt]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), golden(file), "{file}");
    }
}

#[test]
fn hodge_cap9_matches_golden() {
    for (fmt, file) in [("csv", "hodge_cap9.csv"), ("json", "hodge_cap9.json")] {
        let o = linhodge(&["hodge", "--cap", "9", "--provenance", "both", "--format", fmt]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), golden(file), "{file}");
    }
}

#[test]
fn witten_csv_has_genus_one_row() {
    let out = stdout(&linhodge(&["witten", "--cap", "9", "--format", "csv"]));
    assert!(out.lines().any(|l| l == "1,1,1/24"));
}

#[test]
fn coeffs_c_as_json() {
    let o = linhodge(&["coeffs", "C", "--order", "8", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values"]["0"], "1");
    assert_eq!(v["values"]["1"], "1/12");
    assert_eq!(v["values"]["2"], "1/288");
    assert_eq!(v["values"]["3"], "-139/51840");
}

#[test]
fn hodge_gmax_nmax_rows() {
    let o = linhodge(&["hodge", "--gmax", "1", "--nmax", "2", "--provenance", "both", "--format", "json"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(r["g"].as_u64().unwrap() <= 1);
        assert!(r["d"].as_array().unwrap().len() <= 2);
    }
    let lambda1 = rows.iter().filter(|r| r["j"] == 1 && r["d"] == serde_json::json!([0])).count();
    assert_eq!(lambda1, 2, "one row per provenance");
}

#[test]
fn output_is_byte_identical_across_runs_and_jobs() {
    let a = linhodge(&["hodge", "--cap", "9", "--format", "csv"]);
    let b = linhodge(&["hodge", "--cap", "9", "--format", "csv", "--jobs", "1"]);
    let c = linhodge(&["hodge", "--cap", "9", "--format", "csv", "--jobs", "2"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eta.json");
    let o = linhodge(&["series", "eta", "--order", "6", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["coeffs"][1], serde_json::json!([2, "-2/3"]));
}

#[test]
fn op_and_genfun_print() {
    let o = linhodge(&["op", "V_H", "--m", "-1", "--cap", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "(-1/24)*u^2"));
    let o = linhodge(&["genfun", "FHt", "--cap", "3"]);
    assert_eq!(stdout(&o), "(1/6)*t0^3\n(1/24)*t1\n(-1/24)*u^2*t0\n");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(linhodge(&["nonsense"]).status.code(), Some(2));
    assert_eq!(linhodge(&["witten", "--bogus"]).status.code(), Some(2));
    assert_eq!(linhodge(&["series", "nope"]).status.code(), Some(2));
    assert_eq!(linhodge(&["verify", "--cap", "2"]).status.code(), Some(2));
    assert_eq!(linhodge(&["verify", "--cap", "12", "--order", "10"]).status.code(), Some(2));
    assert_eq!(linhodge(&["verify", "no_such_check"]).status.code(), Some(2));
}

#[test]
fn verify_reports_json_and_exit_status() {
    let o = linhodge(&["verify", "coefficients", "commutators", "--cap", "6", "--order", "12", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.len(), 2);
    assert_eq!(v[0]["check_id"], "coefficients");
    assert_eq!(v[0]["status"], "pass");
    assert!(v[0].get("elapsed").is_none());
}
