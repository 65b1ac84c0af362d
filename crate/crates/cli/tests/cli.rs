use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chebyrace"));
    c.env_remove("CHEBYRACE_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn density_of_mod_3() {
    let v = json(&run(&["density", "-q", "3"]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "density");
    let f = &v["fourier"];
    assert!((f["delta"].as_f64().unwrap() - 0.999063).abs() < 1e-5);
    assert!(f["total_error"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["model"]["mean"], 1.0);
}

#[test]
fn trivial_modulus_is_rejected() {
    let out = run(&["density", "-q", "2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no race modulo 2"));
}

#[test]
fn gaussian_method_is_tagged() {
    let v = json(&run(&["density", "-q", "4849845", "--method", "gaussian"]));
    let g = &v["gaussian"];
    assert!(g["warning"].as_str().unwrap().contains("without an error bound"));
    assert!((g["ratio"].as_f64().unwrap() - 4.0779).abs() < 1e-3);
    assert!(v.get("fourier").is_none());
}

#[test]
fn reports_are_deterministic() {
    let args = ["density", "-q", "15", "--method", "all", "--samples", "200000", "--seed", "7"];
    let a = run(&args);
    let b = bin().args(args).arg("--threads").arg("1").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let mc = &v["montecarlo"];
    assert_eq!(mc["seed"], 7);
    assert_eq!(mc["samples"], 200000);
    let diff = (mc["delta"].as_f64().unwrap() - v["fourier"]["delta"].as_f64().unwrap()).abs();
    assert!(diff < 5.0 * mc["err_sampling"].as_f64().unwrap().max(1e-6));
}

#[test]
fn twelve_significant_digits() {
    let out = run(&["density", "-q", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let delta_line = text.lines().find(|l| l.contains("\"delta\"")).unwrap();
    let digits: String = delta_line.chars().filter(|c| c.is_ascii_digit()).collect();
    assert!(digits.trim_start_matches('0').len() <= 12, "{delta_line}");
}

#[test]
fn unreachable_accuracy_exits_3() {
    let out = run(&["density", "-q", "3", "--accuracy", "1e-13", "-T", "30", "--max-height", "40"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("need height"));
}

#[test]
fn zeros_for_mod_15() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(&["zeros", "-q", "15", "-T", "50", "--out", dir.path().to_str().unwrap()]));
    let files = v["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    let mut ds: Vec<i64> = files.iter().map(|f| f["discriminant"].as_i64().unwrap()).collect();
    ds.sort();
    assert_eq!(ds, vec![-15, -3, 5]);
    for f in files {
        assert_eq!(f["verified"], true);
        assert_eq!(f["count"], f["expected_count"]);
        let text = fs::read_to_string(f["path"].as_str().unwrap()).unwrap();
        assert!(text.contains("# verified true"));
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn zeros_for_discriminant() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(&["zeros", "-d", "-4", "-T", "100", "--out", dir.path().to_str().unwrap()]));
    let f = &v["files"][0];
    assert_eq!(f["count"], f["expected_count"]);
    assert_eq!(f["count"], 50);
}

#[test]
fn unwritable_output_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let target = blocker.join("zeros");
    let out = run(&["zeros", "-q", "15", "-T", "20", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

fn write_zeros(dir: &Path, q: &str, height: &str) -> Vec<String> {
    let v = json(&run(&["zeros", "-q", q, "-T", height, "--out", dir.to_str().unwrap()]));
    v["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap().to_string()).collect()
}

#[test]
fn zero_files_are_ingested() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_zeros(dir.path(), "15", "120");
    let mut args = vec!["density", "-q", "15", "--accuracy", "1e-4", "-T", "120", "--max-height", "120"];
    for f in &files {
        args.push("--zeros");
        args.push(f);
    }
    let from_files = json(&run(&args));
    let computed = json(&run(&args[..9]));
    assert_eq!(from_files["fourier"], computed["fourier"]);
}

#[test]
fn tampered_zero_file_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_zeros(dir.path(), "3", "60");
    let text = fs::read_to_string(&files[0]).unwrap();
    let drop = text.lines().position(|l| !l.starts_with('#')).unwrap() + 2;
    let kept: Vec<&str> = text.lines().enumerate().filter(|&(i, _)| i != drop).map(|(_, l)| l).collect();
    fs::write(&files[0], kept.join("\n")).unwrap();
    let out = run(&["density", "-q", "3", "--zeros", &files[0]]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_zero_file_is_an_input_error() {
    let out = run(&["density", "-q", "3", "--zeros", "/nonexistent/zeros.txt"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let a = bin()
        .env("CHEBYRACE_CACHE", dir.path())
        .args(["density", "-q", "15"])
        .output()
        .unwrap();
    assert!(a.status.success());
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 3, "{names:?}");
    assert!(names.iter().any(|n| n.starts_with("dm15_T")));
    let b = bin()
        .env("CHEBYRACE_CACHE", dir.path())
        .args(["density", "-q", "15"])
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn table_rows() {
    let out = run(&["table", "--kmax", "0", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("q,omega,ratio"));

    let v = json(&run(&["table", "--kmax", "3"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row["status"], "computed");
        assert!(row["delta_difference"].as_f64().unwrap() < 1e-4);
    }
}

#[test]
fn table_marks_rows_beyond_scale() {
    let v = json(&run(&["table", "--kmax", "2", "--scale-limit", "1"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["status"], "computed");
    assert_eq!(rows[1]["status"], "skipped (scale)");
    assert!(rows[1]["delta"].is_null());
    let lower = rows[1]["lower_bound"].as_f64().unwrap();
    assert!(lower <= 0.999907);
}

#[test]
fn race_mod_4() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let v = json(&run(&["race", "-q", "4", "--xmax", "1e6", "--csv", csv.to_str().unwrap()]));
    assert_eq!(v["crossings"]["race_form"], 26861);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,pi_1,pi_3,e\n"));
    assert_eq!(text.lines().count() as u64, v["checkpoints"].as_u64().unwrap() + 1);
    let out = run(&["race", "-q", "4", "--xmax", "1e4", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("x,pi_1,pi_3,e"));
}

#[test]
fn race_rejects_bad_limits() {
    assert_eq!(code(&run(&["race", "-q", "4", "--xmax", "1e11"])), 2);
    assert_eq!(code(&run(&["race", "-q", "4", "--xmax", "1e6", "--ratio", "1.5"])), 2);
}

#[test]
fn criteria_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"q": 15, "classes": [2, 7, 8, 1, 4], "weights": [2, 2, 2, -3, -3]}"#).unwrap();
    let v = json(&run(&["criteria", spec.to_str().unwrap()]));
    assert_eq!(v["race"]["orientation"], "biased");
    for key in ["bias_criterion", "limitation"] {
        assert!(v[key]["lhs"].is_number() && v[key]["rhs"].is_number(), "{key}");
    }
}

#[test]
fn malformed_spec_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, "{\n  \"q\": 15,\n  \"classes\": [1, 2],\n  \"weights\": [1, {}]\n}\n").unwrap();
    let out = run(&["criteria", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("weights[1]") && err.contains("line 4"), "{err}");

    fs::write(&spec, r#"{"q": 15, "classes": [1, 4], "weights": [1, -1]}"#).unwrap();
    let out = run(&["criteria", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "residues 1 and 4 give a symmetric race");
}

#[test]
fn text_format() {
    let out = run(&["criteria", "--nr-r", "105", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("schema = 1"));
    assert!(text.contains("bias_criterion.lhs = "));
}
