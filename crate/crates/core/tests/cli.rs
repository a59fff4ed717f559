use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn mvtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvtlab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn residual_example_pair_passes() {
    let out = mvtlab(&["residual", "--F", "cosh(x)", "--G", "exp(x)", "--alpha", "0.5", "--domain", "-3", "3", "--n", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "mvtlab/1");
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["n"], 64);
    assert_eq!(v["config"]["tau"], 1e-8);
    assert_eq!(v["evaluated"], 64 * 63 / 2);
}

#[test]
fn residual_quadratic_pair_passes() {
    let out = mvtlab(&["residual", "--F", "x^2", "--G", "x", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn residual_cubic_fails_at_corner() {
    let out = mvtlab(&["residual", "--F", "x^3", "--G", "x", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["argmax"], serde_json::json!([-3.0, 3.0]));
    // (b - a)^3 / 4 at the corner pair, times g = 1
    assert!((v["max_abs"].as_f64().unwrap() - 54.0).abs() < 1e-9);
}

#[test]
fn residual_without_g_sweeps_lagrange() {
    let out = mvtlab(&["residual", "--F", "3*x + 1", "--alpha", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["equation"], "lagrange");
}

#[test]
fn residual_csv_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("grid.csv");
    let out_path = dir.path().join("report.json");
    let out = mvtlab(&[
        "residual", "--F", "x^3", "--G", "x", "--n", "5",
        "--csv", csv_path.to_str().unwrap(), "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["evaluated"], 10);

    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["a", "b", "residual"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        for field in r.iter() {
            let mantissa = field.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
        }
        let (a, b, res): (f64, f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap());
        // Oracle: x^3 - 3 c^2 x over [a, b] leaves (b - a)^3 / 4.
        assert!((res - (b - a).powi(3) / 4.0).abs() < 1e-12);
    }
}

#[test]
fn classify_examples() {
    let v = json(&mvtlab(&["classify", "--F", "cosh(x)", "--G", "exp(x)"]));
    assert_eq!(v["verdict"], "c");
    assert!((v["mu"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let out = mvtlab(&["classify", "--F", "2*x+1", "--G", "x"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "a");
    assert!(v["dependence"]["coefficients"].is_array());

    let v = json(&mvtlab(&["classify", "--F", "sin(2*x)", "--G", "cos(2*x)"]));
    assert_eq!(v["verdict"], "d");
    assert!((v["mu"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(v["fit"]["coeffs_F"].is_array());
    assert!(v["per_interval_tags"].as_array().unwrap().iter().all(|t| t["tag"] == "t"));
}

#[test]
fn classify_non_solution_exits_one() {
    let out = mvtlab(&["classify", "--F", "x^2", "--G", "x+1", "--alpha", "0.3333333333333333"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "unclassified");
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn construct_examples() {
    let out = mvtlab(&["construct", "--g", "exp(x)", "--A", "0", "--K", "1", "--x0", "0", "--ref", "sinh(x)"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["max_deviation"].as_f64().unwrap() <= 1e-8);

    let out = mvtlab(&["construct", "--K", "0", "--A", "3", "--g", "cos(x)", "--ref", "3*cos(x)", "--tol", "0"]);
    assert_eq!(out.status.code(), Some(0));

    let out = mvtlab(&["construct", "--g", "1", "--A", "0", "--K", "1", "--x0", "0", "--ref", "x", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn construct_reports_deviation_failure() {
    let out = mvtlab(&["construct", "--g", "exp(x)", "--ref", "cosh(x)", "--at", "0.5", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["table"].as_array().unwrap().len(), 2);
}

#[test]
fn construct_rejects_vanishing_g() {
    let out = mvtlab(&["construct", "--g", "x", "--K", "1", "--x0", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn verify_example_passes() {
    let out = mvtlab(&["verify-example"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["stages"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["residual", "--F", "x^"],
        vec!["residual", "--F", "foo(x)"],
        vec!["residual", "--F", "x", "--alpha", "1.5"],
        vec!["residual", "--F", "x", "--domain", "2", "1"],
        vec!["residual", "--bogus"],
        vec!["classify", "--F", "x"],
        vec!["nonsense"],
        vec!["suite", "--families", "q"],
    ] {
        let out = mvtlab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn job_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    fs::write(&job, r#"{"functions": {"F": "x^3", "G": "x"}, "alpha": 0.5, "domain": [-1, 1], "n": 12}"#).unwrap();
    let out = mvtlab(&["residual", "--config", job.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = mvtlab(&["residual", "--config", job.to_str().unwrap(), "--F", "x^2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["F"], "x^2");
    assert_eq!(v["config"]["n"], 12);

    fs::write(&job, r#"{"functions": {"F": "x"}, "unknown": 1}"#).unwrap();
    assert_eq!(mvtlab(&["residual", "--config", job.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn suite_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.json");
    fs::write(&cfg, r#"{"count": 5, "seed": 99, "families": ["b", "d"]}"#).unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mvtlab"))
            .args(["suite", "--config", cfg.to_str().unwrap()])
            .env("MVTLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("0"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], "mvtlab/1");
    assert_eq!(v["config"]["seed"], 99);
    assert_eq!(v["config"]["rng"]["gamma"], 0x9E37_79B9_7F4A_7C15u64);
    assert_eq!(v["draws"].as_array().unwrap().len(), 10);
    assert_eq!(v["diagonal_fraction"], 1.0);
}

#[test]
fn suite_flags_and_summary() {
    let out = mvtlab(&["suite", "--count", "3", "--families", "a,c", "--summary"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["draws"].as_array().unwrap().len(), 0);
    assert_eq!(v["confusion"]["counts"][0][0], 3);
    assert_eq!(v["confusion"]["counts"][2][2], 3);
}
