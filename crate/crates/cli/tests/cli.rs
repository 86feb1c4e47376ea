//! End-to-end runs of the `heun` binary.

use std::process::{Command, Output};

use assoc_heun::heun::{heun_series, ode_residual, AssocParams, HeunParams, SeriesConfig};
use serde_json::Value;

const GOLDEN_ARGS: [&str; 14] = [
    "--alpha", "0", "--beta", "0.5", "--gamma", "0.5", "--delta", "0.5", "--eps", "0.5", "--s", "0.3", "--k2", "0.49",
];

fn heun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heun"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn eval_args(w: &str) -> Vec<&str> {
    let mut args = vec!["eval"];
    args.extend(GOLDEN_ARGS);
    args.extend(["--w", w]);
    args
}

#[test]
fn eval_at_origin_is_one() {
    let out = heun(&eval_args("0"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rows"][0]["value"].as_f64(), Some(1.0));
    assert!(v["N"].as_u64().unwrap() > 0);
}

#[test]
fn eval_matches_golden_file() {
    let out = heun(&eval_args("0.4"));
    assert_eq!(out.status.code(), Some(0));
    let golden = include_str!("golden/eval_w0.4.json");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn golden_value_satisfies_the_equation() {
    let v: Value = serde_json::from_str(include_str!("golden/eval_w0.4.json")).unwrap();
    let frozen = v["rows"][0]["value"].as_f64().unwrap();
    let p = HeunParams::new(0.0, 0.5, 0.5, 0.5, 0.5, 0.3, 0.49).unwrap();
    let series = heun_series(&p, &SeriesConfig::default()).unwrap();
    let r = ode_residual(&AssocParams::plain(p), &series, 0.4).unwrap();
    assert!(r.relative() < 1e-12, "{r:?}");
    assert!((series.eval(0.4).unwrap() - frozen).abs() <= 1e-15);
}

#[test]
fn fuchs_violation_exits_two() {
    let mut args = eval_args("0.4");
    let eps = args.iter().position(|a| *a == "--eps").unwrap();
    args[eps + 1] = "0.7";
    let out = heun(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Fuchs"));
}

#[test]
fn radius_beyond_r_max_exits_two() {
    assert_eq!(heun(&eval_args("0.95")).status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_two() {
    assert_eq!(heun(&["verify", "nope"]).status.code(), Some(2));
}

#[test]
fn verify_transforms_passes() {
    let out = heun(&["verify", "transforms"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["worst"]["value"].as_f64().unwrap() < 1e-8);
}

#[test]
fn verify_stieltjes_passes() {
    let out = heun(&["verify", "stieltjes"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["worst"]["value"].as_f64().unwrap() < 1e-6);
}

#[test]
fn loose_tolerance_breach_exits_one() {
    // a fraction stopped once two depths agree to 50% misses the 1e-6 bound
    let out = heun(&["verify", "stieltjes", "--cf-tol", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("worst"));
    assert_eq!(json(&out)["passed"], Value::Bool(false));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["stieltjes", "--c", "0.75", "--mu", "0.5", "--k2", "0.5", "--z", "-1,-1+0.5i,-10"];
    let first = heun(&args).stdout;
    let mut serial = args.to_vec();
    serial.extend(["--threads", "1"]);
    assert_eq!(first, heun(&args).stdout);
    assert_eq!(first, heun(&serial).stdout);
}

#[test]
fn csv_output_has_header_and_rows() {
    let out = heun(&["closed-form", "--family", "2", "--c", "0.75", "--mu", "0.5", "--sigma", "1", "--k2", "0.64", "--w", "0.1,0.3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "w,prefactor,series_value,closed_form_value,abs_diff");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff < 1e-6, "{line}");
    }
}

#[test]
fn config_file_sets_format_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "format = \"csv\"\nr_max = 0.5\n").unwrap();
    let cfg = path.to_str().unwrap();

    let mut args = eval_args("0.4");
    args.extend(["--config", cfg]);
    let out = heun(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("w,value,n_terms,tail_estimate\n"));

    // r_max = 0.5 from the file rejects w = 0.6 unless the flag raises it
    let mut args = eval_args("0.6");
    args.extend(["--config", cfg]);
    assert_eq!(heun(&args).status.code(), Some(2));
    args.extend(["--r-max", "0.9", "--format", "json"]);
    let out = heun(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["r_max"].as_f64(), Some(0.9));
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "r_max = 1.5\n").unwrap();
    let out = heun(&["verify", "transforms", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&path, "unknown_key = 1\n").unwrap();
    let out = heun(&["verify", "transforms", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transform_reports_shifted_parameter() {
    let out = heun(&[
        "transform", "--kind", "second", "--alpha", "0.3", "--beta", "1.1", "--gamma", "0.9", "--delta", "0.6", "--s",
        "0.35", "--k2", "0.49", "--c", "0.4", "--mu", "0.4", "--w", "-0.5,0.4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["abs_diff"].as_f64().unwrap() < 1e-8);
        assert!((row["params_out"]["c"].as_f64().unwrap() - (0.4 + 0.3 - 1.0)).abs() < 1e-15);
    }
}

#[test]
fn bd_check_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = heun(&[
        "bd-check", "--c", "0.75", "--mu", "1", "--k2", "0.5", "--p", "1,2", "--t-max", "10", "--trajectory",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["rel_diff"].as_f64().unwrap() < 1e-3);
    }
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,p00\n0,1e0\n"));
}

#[test]
fn stieltjes_on_support_exits_two() {
    assert_eq!(heun(&["stieltjes", "--c", "0.75", "--k2", "0.5", "--z", "1"]).status.code(), Some(2));
}
