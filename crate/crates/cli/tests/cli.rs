use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bladegauge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bladegauge"))
        .args(args)
        .env_remove("BLADEGAUGE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const TWO_PAIR: &str = r#"{"dim":4,"pairs":[
  {"pi":"0.8 * sin(x0 + x2)","phi":"x1 - 0.5 * x3"},
  {"pi":"0.5 * x2 * cos(x1)","phi":"x3 + x0^2"}]}"#;

#[test]
fn default_verify_passes_with_envelope() {
    let out = bladegauge(&["verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["tool"], "bladegauge");
    assert_eq!(v["command"], "verify");
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["tolerances"]["fd_step"], 0.001);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() > 20);
    assert!(checks.iter().all(|c| c["status"] != "fail"));
}

#[test]
fn quantized_monopole_is_single_valued() {
    let out = bladegauge(&["verify", "--scenario", "monopole", "--g", "0.5"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["single_valued"], true);
    assert_eq!(v["quantization_satisfied"], true);
    let flux = v["flux"].as_f64().unwrap();
    assert!((flux - 2.0 * std::f64::consts::PI).abs() < 5e-3 * 2.0 * std::f64::consts::PI);
}

#[test]
fn unquantized_monopole_is_an_expected_failure() {
    let out = bladegauge(&["verify", "--scenario", "monopole", "--g", "0.3"]);
    assert_eq!(code(&out), 0, "negative control should not fail the run");
    let v = stdout_json(&out);
    assert_eq!(v["single_valued"], false);
    assert_eq!(v["quantization_satisfied"], false);
    let single = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"].as_str().unwrap().ends_with("single_valued"))
        .expect("single_valued check present");
    assert_eq!(single["status"], "expected_fail");
}

#[test]
fn planewave_ym_residual_within_tolerance() {
    let out = bladegauge(&["residuals", "--scenario", "planewave", "--eq", "ym", "--check"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["equation"], "ym");
    assert!(v["max"].as_f64().unwrap() <= 1e-5);
    assert_eq!(v["within_tolerance"], true);
}

#[test]
fn residual_csv_has_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let rows = |eq: &str| {
        let csv = dir.path().join(format!("{eq}.csv"));
        let out = bladegauge(&[
            "residuals",
            "--scenario",
            "planewave",
            "--eq",
            eq,
            "--grid",
            "-0.5:0.5:2",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let text = fs::read_to_string(&csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("point,index,norm"));
        lines.count()
    };
    // 16 cells; ym carries a free index, maxmod does not
    assert_eq!(rows("ym"), 16 * 4);
    assert_eq!(rows("maxmod"), 16);
}

#[test]
fn malformed_json_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"scenario": "planewave", "k": [1, 2"#);
    let out = bladegauge(&["verify", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));
}

#[test]
fn schema_violation_names_the_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"scenario": "planewave", "k": "x"}"#);
    let out = bladegauge(&["verify", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/k"), "{err}");
    assert!(err.contains("config.schema.json"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&bladegauge(&["verify", "--scenario", "no_such_thing"])), 2);
    assert_eq!(code(&bladegauge(&["residuals", "--scenario", "planewave"])), 2);
    assert_eq!(code(&bladegauge(&["residuals", "--scenario", "planewave", "--eq", "bogus"])), 2);
    assert_eq!(code(&bladegauge(&["embedded", "--surface", "torus", "--major", "0.5", "--minor", "1"])), 2);
    assert_eq!(code(&bladegauge(&["frobnicate"])), 2);
}

#[test]
fn failing_check_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "tight.json",
        r#"{"scenario": "embedded", "tolerances": {"fd_factor": 1e-6}}"#,
    );
    let out = bladegauge(&["verify", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["passed"], false);
    assert!(!v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn darboux_two_pair_has_rank_one() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "twopair.json", TWO_PAIR);
    let out = bladegauge(&["darboux", "--input", &input, "--samples", "16"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["N"], 4);
    assert_eq!(v["measured_rank"], 1);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-5);
}

#[test]
fn embedded_sphere_radius_two() {
    let out = bladegauge(&["embedded", "--surface", "sphere", "--a", "2", "--points", "4"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,v,metric_det,riemann_0101,gauss,shape_residual,route_gap"));
    let mut rows = 0;
    for line in lines {
        let gauss: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!((gauss - 0.25).abs() < 1e-6, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 16);
}

#[test]
fn sigma_flow_decreases_action() {
    let dir = TempDir::new().unwrap();
    let init = write(
        dir.path(),
        "init.json",
        r#"{"scenario": {"scenario": "random_smooth", "seed": 3, "big_n": 3, "n": 1, "dim": 2},
            "lower": [-0.5, -0.5], "upper": [0.5, 0.5], "points": [5, 5], "periodic": [false, false]}"#,
    );
    let dump = dir.path().join("dump.json");
    let out = bladegauge(&["sigma-flow", "--init", &init, "--steps", "20", "--dump", dump.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["monotone"], true);
    assert!(v["final_action"].as_f64().unwrap() < v["initial_action"].as_f64().unwrap());
    assert!(v["invariant_defect"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["actions"].as_array().unwrap().len(), 21);
    let samples: Value = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(samples.as_array().unwrap().len(), 25);
}

#[test]
fn sigma_init_needs_one_source() {
    let dir = TempDir::new().unwrap();
    let init = write(
        dir.path(),
        "init.json",
        r#"{"lower": [0], "upper": [1], "points": [4], "periodic": [true]}"#,
    );
    assert_eq!(code(&bladegauge(&["sigma-flow", "--init", &init])), 2);
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = bladegauge(&["verify", "--scenario", "random_smooth(7)", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_bladegauge"))
            .args(["residuals", "--scenario", "random_smooth(2)", "--eq", "ym"])
            .env("BLADEGAUGE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 2);
}
