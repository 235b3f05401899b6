#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command as Proc, Output};

use serde_json::Value;
use spraylab::{run, Command, RunConfig, Source};
use spraylab_core::dsl::catalog;

fn spraylab(args: &[&str]) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_spraylab"))
        .args(args)
        .env_remove("SPRAYLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_str().expect("floats are strings").parse().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn verdict<'a>(report: &'a Value, check: &str, name: &str) -> &'a Value {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["check"] == check && v["name"] == name)
        .unwrap_or_else(|| panic!("no verdict {check}/{name}"))
}

#[test]
fn poincare_passes_with_kappa_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = spraylab(&[
        "check-cc",
        "--metric",
        "poincare_ball",
        "--dim",
        "2",
        "--points",
        "100",
        "--seed",
        "42",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("RESULT: PASS"));
    let r = read_json(&json);
    assert_eq!(r["passed"], true);
    // classical sectional curvature at a few of the sampled base points
    let m = catalog("poincare_ball", 2, 42).unwrap();
    let pts = r["per_point"].as_array().unwrap();
    assert_eq!(pts.len(), 100);
    for p in pts.iter().take(5) {
        let x: Vec<f64> = p["x"].as_array().unwrap().iter().map(f).collect();
        let oracle = common::sectional_curvature(&m, &x, &[1.0, 0.0], &[0.0, 1.0]);
        assert!((f(&p["values"]["kappa"]) - oracle).abs() < 1e-6);
    }
    let mean = f(&r["aggregate"]["check-cc"]["kappa_spread"]["mean"]);
    assert!((mean + 1.0).abs() < 1e-6);
}

#[test]
fn beltrami_funk_half_passes_both_ways() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = spraylab(&[
        "beltrami",
        "--metric",
        "euclidean",
        "--factor",
        "funk_half",
        "--dim",
        "2",
        "--points",
        "20",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = read_json(&json);
    for name in ["hamel", "deformed_cc", "equivalence"] {
        assert_eq!(
            verdict(&r, "beltrami-verdict", name)["passed"],
            true,
            "{name}"
        );
    }
}

#[test]
fn rand_riemann_fails_with_kappa_table() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = spraylab(&[
        "check-cc",
        "--metric",
        "rand_riemann",
        "--dim",
        "2",
        "--seed",
        "7",
        "--points",
        "20",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("RESULT: FAIL"));
    let header = text
        .lines()
        .find(|l| l.trim_start().starts_with("point"))
        .expect("table");
    assert!(header.contains("kappa"));
    assert!(
        text.lines()
            .filter(|l| l.trim_start().starts_with("19 "))
            .count()
            == 1
    );
    // per-point kappa is the Gauss curvature of the sampled base point
    let r = read_json(&json);
    let m = catalog("rand_riemann", 2, 7).unwrap();
    let mut gauss = Vec::new();
    for p in r["per_point"].as_array().unwrap() {
        let x: Vec<f64> = p["x"].as_array().unwrap().iter().map(f).collect();
        let k = common::sectional_curvature(&m, &x, &[1.0, 0.0], &[0.0, 1.0]);
        assert!((f(&p["values"]["kappa"]) - k).abs() < 1e-5 * k.abs().max(1.0));
        gauss.push(k);
    }
    let mean = gauss.iter().sum::<f64>() / gauss.len() as f64;
    let var = gauss.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (gauss.len() - 1) as f64;
    assert!(var.sqrt() > 1e-2);
    assert_eq!(verdict(&r, "check-cc", "kappa_constant")["passed"], false);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let wrong_dim = dir.path().join("m.txt");
    std::fs::write(&wrong_dim, "dim=3\nsqrt(y1^2 + y2^2 + y3^2)\n").unwrap();
    let bad_expr = dir.path().join("b.txt");
    std::fs::write(&bad_expr, "dim=2\nsqrt(y1^2 + \n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["hamel", "--metric", "euclidean"],
        vec!["check-cc"],
        vec!["check-cc", "--metric", "euclidean", "--points", "0"],
        vec!["check-cc", "--metric", "no_such_metric"],
        vec!["check-cc", "--metric", "euclidean", "--tol-id", "-1"],
        vec!["check-cc", "--metric", "euclidean", "--max-order", "40"],
        vec!["check-cc", "--metric", "euclidean", "--bogus"],
        vec!["check-cc", "--metric", "euclidean", "--metric-file", "x"],
        vec!["check-cc", "--metric-file", "/nonexistent/metric.txt"],
        vec![
            "check-cc",
            "--metric-file",
            wrong_dim.to_str().unwrap(),
            "--dim",
            "2",
        ],
        vec!["check-cc", "--metric-file", bad_expr.to_str().unwrap()],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = spraylab(&args);
        assert_eq!(code(&out), 2, "{args:?}");
    }
}

#[test]
fn evaluation_failure_exits_1_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.txt");
    // 0-homogeneous, rejected as a projective factor
    std::fs::write(&p, "dim=2\nx1 * y1 / sqrt(y1^2 + y2^2)\n").unwrap();
    let out = spraylab(&[
        "bianchi",
        "--metric",
        "euclidean",
        "--factor-file",
        p.to_str().unwrap(),
        "--points",
        "5",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("homogeneous"));
}

#[test]
fn metric_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("sphere.txt");
    std::fs::write(
        &m,
        "# projective model of the unit sphere\ndim=2\ndomain=ball 0.8\n\
         sqrt((1 + x1^2 + x2^2) * (y1^2 + y2^2) - (x1*y1 + x2*y2)^2)\n  / (1 + x1^2 + x2^2)\n",
    )
    .unwrap();
    let json = dir.path().join("r.json");
    let out = spraylab(&[
        "check-cc",
        "--metric-file",
        m.to_str().unwrap(),
        "--points",
        "20",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let r = read_json(&json);
    assert_eq!(r["config"]["metric"]["source"], "file");
    assert_eq!(r["config"]["metric"]["domain"]["shape"], "ball");
    let mean = f(&r["aggregate"]["check-cc"]["kappa_spread"]["mean"]);
    assert!((mean - 1.0).abs() < 1e-6);
}

#[test]
fn json_schema() {
    let out = spraylab(&[
        "hamel",
        "--metric",
        "euclidean",
        "--factor",
        "rand_factor",
        "--points",
        "3",
        "--json",
        "-",
    ]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in [
        "config",
        "per_point",
        "aggregate",
        "verdicts",
        "versions",
        "notes",
        "passed",
    ] {
        assert!(r.get(key).is_some(), "{key}");
    }
    assert!(r.get("timestamp").is_none());
    assert_eq!(r["config"]["command"], "hamel");
    assert_eq!(r["config"]["seed"], 42);
    assert_eq!(r["config"]["tolerances"]["curvature"], "1e-7");
    assert_eq!(r["versions"]["spraylab"], env!("CARGO_PKG_VERSION"));
    let p = &r["per_point"][0];
    assert_eq!(p["index"], 0);
    assert!(p["values"]
        .as_object()
        .unwrap()
        .values()
        .all(Value::is_string));
    let v = &r["verdicts"][0];
    assert!(v["value"].is_string() && v["tolerance"].is_string());
}

#[test]
fn catalog_lists_everything() {
    let out = spraylab(&["catalog", "--dim", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in spraylab_core::dsl::catalog_names()
        .iter()
        .chain(spraylab_core::dsl::factor_names())
    {
        assert!(text.contains(name), "{name}");
    }
}

fn config(threads: usize) -> RunConfig {
    let mut cfg = RunConfig::new(Command::Invariants);
    cfg.metric = Some(Source::Catalog("rand_riemann".into()));
    cfg.factor = Some(Source::Catalog("rand_factor".into()));
    cfg.points = 12;
    cfg.seed = 5;
    cfg.threads = Some(threads);
    cfg
}

#[test]
fn reports_identical_across_runs_and_threads() {
    let a = run(&config(1)).unwrap().json_string();
    let b = run(&config(1)).unwrap().json_string();
    let c = run(&config(4)).unwrap().json_string();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn thread_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let json = dir.path().join(format!("{i}.json"));
        let out = Proc::new(env!("CARGO_BIN_EXE_spraylab"))
            .args([
                "check-cc",
                "--metric",
                "sphere_projective",
                "--dim",
                "3",
                "--points",
                "6",
            ])
            .args(["--json", json.to_str().unwrap()])
            .env("SPRAYLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        bytes.push(std::fs::read(&json).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let out = Proc::new(env!("CARGO_BIN_EXE_spraylab"))
        .args(["check-cc", "--metric", "euclidean", "--points", "2"])
        .env("SPRAYLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
