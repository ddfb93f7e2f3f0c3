use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin(cwd: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mussel-bif"));
    cmd.current_dir(cwd).env_remove("MUSSEL_BIF_THREADS");
    cmd
}

fn run(cwd: &Path, args: &[&str]) -> Output {
    bin(cwd).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn entries(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect()
}

const ODE_CONFIG: &str = "r = 1.2\nalpha = 0.45\ngamma = 8\n";

#[test]
fn tau_star_reports_first_critical_delay() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["tau-star", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&tmp.path().join("o/tau_star.json"));
    let tau = report["result"]["tau"].as_f64().unwrap();
    assert!((tau - 2.3545).abs() < 1e-3, "tau* = {tau}");
    assert_eq!(report["result"]["n0"], 0);
    assert_eq!(report["result"]["s0"], serde_json::json!([0]));
    assert_eq!(report["hypotheses"]["h3"], true);
    let csv = fs::read_to_string(tmp.path().join("o/critical_delays.csv")).unwrap();
    assert!(csv.starts_with("n,j,omega,tau,transversality\n0,0,"));
}

#[test]
fn classify_reports_stable_boundary_below_unit_growth() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["classify", "--set", "r=0.5", "--out", "o"]);
    assert_eq!(code(&out), 0);
    let report = json(&tmp.path().join("o/classify.json"));
    assert_eq!(report["result"]["boundary"]["verdict"], "stable");
    assert_eq!(report["result"]["equilibrium"], Value::Null);
    assert_eq!(report["hypotheses"]["h1"], false);
}

#[test]
fn classify_reference_point() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["classify", "--out", "o"]);
    assert_eq!(code(&out), 0);
    let report = json(&tmp.path().join("o/classify.json"));
    assert_eq!(report["result"]["boundary"]["verdict"], "unstable");
    assert_eq!(report["result"]["verdict"], "stable");
    let m = report["result"]["equilibrium"]["m"].as_f64().unwrap();
    assert!((m - 0.125).abs() < 1e-12);
}

#[test]
fn missing_config_is_io_failure_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["simulate", "--config", "absent.toml", "--out", "o"]);
    assert_eq!(code(&out), 5);
    assert!(!tmp.path().join("o").exists());
    assert!(entries(tmp.path()).is_empty());
}

#[test]
fn config_errors_are_usage_failures_with_context() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.toml"), "r = 2\nalpha = = 0.1\n").unwrap();
    let out = run(tmp.path(), &["classify", "--config", "bad.toml", "--out", "o"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml") && err.contains("line 2"), "{err}");

    fs::write(tmp.path().join("unknown.toml"), "beta = 1\n").unwrap();
    let out = run(
        tmp.path(),
        &["classify", "--config", "unknown.toml", "--out", "o"],
    );
    assert_eq!(code(&out), 2);

    for set in ["r", "r=abc", "kappa=1", "gamma=0"] {
        let out = run(tmp.path(), &["classify", "--set", set, "--out", "o"]);
        assert_eq!(code(&out), 2, "--set {set}");
    }
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn invalid_numeric_options_rejected_before_work() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["simulate", "--dt", "0", "--out", "o"][..],
        &["simulate", "--transient", "1.5", "--out", "o"][..],
        &["sweep", "--r-min", "1.5", "--r-max", "1.2", "--out", "o"][..],
        &["hopf-curve", "--alpha-min", "0", "--out", "o"][..],
        &["verify", "--grid-points", "4", "--out", "o"][..],
        &["simulate", "--frobnicate", "--out", "o"][..],
    ] {
        assert_eq!(code(&run(tmp.path(), args)), 2, "{args:?}");
    }
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn hypothesis_violation_exit_code() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["normal-form", "--set", "r=0.5", "--out", "o"]);
    assert_eq!(code(&out), 3);
    let out = run(tmp.path(), &["simulate", "--set", "r=0.5", "--out", "o"]);
    assert_eq!(code(&out), 3, "no default initial state without E*");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn flags_override_config_file() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.toml"), "r = 3\nalpha = 0.1\ntau = 1\n").unwrap();
    let out = run(
        tmp.path(),
        &[
            "classify", "--config", "c.toml", "--set", "r=2", "--set", "r=2.5", "--out", "o",
        ],
    );
    assert_eq!(code(&out), 0);
    let params = &json(&tmp.path().join("o/classify.json"))["params"];
    assert_eq!(params["r"], 2.5);
    assert_eq!(params["tau"], 1.0);
    assert_eq!(params["gamma"], 0.5);
}

#[test]
fn normal_form_report_and_summary() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["normal-form", "--out", "o"]);
    assert_eq!(code(&out), 0);
    let report = json(&tmp.path().join("o/normal_form.json"));
    let c = &report["result"]["coefficients"];
    assert!(c["beta2"].as_f64().unwrap() < 0.0);
    assert!(c["mu2"].as_f64().unwrap() > 0.0);
    assert_eq!(c["direction"], "forward");
    assert_eq!(c["orbit_stability"], "stable");
    assert!(report["result"]["terms"]["modes"].is_array());
    let summary = fs::read_to_string(tmp.path().join("o/normal_form.txt")).unwrap();
    assert!(summary.contains("c1(0)") && summary.contains("forward"));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).lines().next(),
        summary.lines().next()
    );
}

#[test]
fn simulate_writes_only_declared_outputs_deterministically() {
    let tmp = TempDir::new().unwrap();
    let args = |dir: &'static str| {
        [
            "simulate",
            "--set",
            "tau=1",
            "--intervals",
            "16",
            "--t-end",
            "20",
            "--frames",
            "20",
            "--wavenumber",
            "2",
            "--format",
            "both",
            "--out",
            dir,
        ]
    };
    assert_eq!(code(&run(tmp.path(), &args("a"))), 0);
    assert_eq!(code(&run(tmp.path(), &args("b"))), 0);
    assert_eq!(
        entries(tmp.path()),
        BTreeSet::from(["a".to_string(), "b".to_string()])
    );
    let expected: BTreeSet<String> = [
        "heatmap.dat",
        "orbit.json",
        "plot.gp",
        "timeseries.csv",
        "trajectory.bin",
        "trajectory.csv",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    assert_eq!(entries(&tmp.path().join("a")), expected);
    for f in &expected {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let csv = fs::read_to_string(tmp.path().join("a/trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x,m,a\n"));
    assert_eq!(csv.lines().count(), 1 + 21 * 17);
    let bin = fs::read(tmp.path().join("a/trajectory.bin")).unwrap();
    assert_eq!(&bin[..8], b"MBTRAJ01");
    let plot = fs::read_to_string(tmp.path().join("a/plot.gp")).unwrap();
    assert!(plot.contains("heatmap.dat") && plot.contains("timeseries.csv"));
    let orbit = json(&tmp.path().join("a/orbit.json"));
    assert!(orbit["result"]["a_bound_excess"].as_f64().unwrap() <= 0.0);
}

#[test]
fn kinetic_simulation_from_explicit_state() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &[
            "simulate",
            "--set",
            "r=0.8",
            "--set",
            "alpha=0.5",
            "--set",
            "gamma=8",
            "--intervals",
            "0",
            "--m0",
            "3",
            "--a0",
            "0.2",
            "--amplitude",
            "0",
            "--t-end",
            "200",
            "--out",
            "o",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let orbit = json(&tmp.path().join("o/orbit.json"));
    let r = &orbit["result"];
    assert_eq!(r["final_deviation"], Value::Null);
    assert!(r["orbit"]["amplitude_m"][1].as_f64().unwrap() < 1e-3);
    assert_eq!(r["orbit"]["is_periodic"], false);
}

#[test]
fn sweep_table_and_determinism() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("ode.toml"), ODE_CONFIG).unwrap();
    let args = |dir: &'static str| {
        [
            "sweep", "--config", "ode.toml", "--r-min", "1.05", "--r-max", "1.3", "--r-step", "0.25",
            "--t-end", "2000", "--out", dir,
        ]
    };
    assert_eq!(code(&run(tmp.path(), &args("a"))), 0);
    assert_eq!(code(&run(tmp.path(), &args("b"))), 0);
    let a = fs::read_to_string(tmp.path().join("a/sweep.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(tmp.path().join("b/sweep.csv")).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "r,oscillating,m_min,m_max,amplitude,period,error");
    assert!(lines[1].starts_with("1.05000000000e0,false,"));
    assert!(lines[2].starts_with("1.30000000000e0,true,"));
}

#[test]
fn curves_and_region_map() {
    let tmp = TempDir::new().unwrap();
    let out = run(
        tmp.path(),
        &[
            "hopf-curve",
            "--set",
            "gamma=8",
            "--alpha-min",
            "0.45",
            "--alpha-max",
            "0.45",
            "--resolution",
            "1",
            "--out",
            "o",
        ],
    );
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(tmp.path().join("o/hopf_curve.csv")).unwrap();
    let rs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rs.len(), 2);
    assert!((rs[0] - 1.0865).abs() < 1e-3 && (rs[1] - 1.7286).abs() < 1e-3);

    let out = run(
        tmp.path(),
        &[
            "turing-curve",
            "--set",
            "d=0.01",
            "--resolution",
            "5",
            "--regions",
            "6",
            "--out",
            "t",
        ],
    );
    assert_eq!(code(&out), 0);
    let curve = fs::read_to_string(tmp.path().join("t/turing_curve.csv")).unwrap();
    assert!(curve.starts_with("alpha,r,branch\n") && curve.lines().count() > 1);
    let regions = fs::read_to_string(tmp.path().join("t/regions.csv")).unwrap();
    assert_eq!(regions.lines().count(), 1 + 36);
    let names: BTreeSet<&str> = regions
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    let known = ["T_a", "T_b", "T_c", "T_d", "non-H1", "hopf-unstable"];
    assert!(names.iter().all(|n| known.contains(n)), "{names:?}");
}

#[test]
fn verify_emits_pass_matrix() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["verify", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&tmp.path().join("o/verify.json"));
    let checks = report["result"]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));
    let csv = fs::read_to_string(tmp.path().join("o/verify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + checks.len());
}

#[test]
fn thread_override() {
    let tmp = TempDir::new().unwrap();
    let ok = bin(tmp.path())
        .env("MUSSEL_BIF_THREADS", "1")
        .args(["tau-star", "--out", "o"])
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
    let bad = bin(tmp.path())
        .env("MUSSEL_BIF_THREADS", "zero")
        .args(["tau-star", "--out", "p"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
    assert!(!tmp.path().join("p").exists());
}
