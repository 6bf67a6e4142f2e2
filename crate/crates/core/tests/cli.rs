mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use fracstab::cli::{AnalyzeOutput, ApproxOutput, GershgorinOutput, SimulateOutput};
use fracstab::spectrum::{analyze_rational, DEFAULT_TOL};

fn fracstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracstab"))
        .args(args)
        .env("FRACSTAB_THREADS", "2")
        .output()
        .unwrap()
}

fn data(name: &str) -> String {
    data_file(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_example_4_1() {
    let o = fracstab(&["analyze", &data("example_4_1.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("verdict: stable"));
    assert!(text.contains("gamma: 1/12"));
    assert!(text.contains("degree: 15"));
}

#[test]
fn analyze_identity_is_unstable() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "eye.json", r#"{"matrix": [[1]], "orders": ["1"]}"#);
    assert_eq!(fracstab(&["analyze", &f]).status.code(), Some(1));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"matrix\": [[1]],\n \"orders\": [\"1/2\",]}");
    let o = fracstab(&["analyze", &bad]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let bad = write(dir.path(), "bad2.json", r#"{"matrix": [[1]], "orders": [[1]]}"#);
    let o = fracstab(&["analyze", &bad]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("orders[0]"));

    assert_eq!(fracstab(&["analyze"]).status.code(), Some(64));
    assert_eq!(fracstab(&["analyze", "/nonexistent/file.json"]).status.code(), Some(66));
}

#[test]
fn analyze_json_round_trips() {
    let o = fracstab(&["analyze", &data("example_6_4.json"), "--json", "--no-meta"]);
    assert_eq!(o.status.code(), Some(0));
    let parsed: AnalyzeOutput = serde_json::from_str(&stdout(&o)).unwrap();
    let expected = analyze_rational(&ex64(), DEFAULT_TOL).unwrap();
    assert_eq!(parsed.report.as_ref(), Some(&expected));
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap() + "\n", stdout(&o));
}

#[test]
fn json_output_is_deterministic() {
    let args = ["analyze", &data("example_5_1.json"), "--json", "--no-meta"];
    let a = fracstab(&args);
    let b = fracstab(&args);
    assert_eq!(a.stdout, b.stdout);
    let with_meta: AnalyzeOutput =
        serde_json::from_slice(&fracstab(&["analyze", &data("example_5_1.json"), "--json"]).stdout).unwrap();
    assert!(with_meta.meta.is_some());
}

#[test]
fn analyze_general_route() {
    let o = fracstab(&["analyze", &data("example_5_1.json"), "--json", "--no-meta"]);
    assert_eq!(o.status.code(), Some(0));
    let parsed: AnalyzeOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(parsed.method, "general");
    let g = parsed.general.unwrap();
    assert_eq!(g.beta, ["1/2", "1/4", "1/3", "1/6"]);
    assert!((g.lambda_min - 0.204).abs() < 1e-3);
}

#[test]
fn approx_example_5_1() {
    let o = fracstab(&["approx", &data("example_5_1.json"), "--eps", "0.1", "--json", "--no-meta"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let parsed: ApproxOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(parsed.beta, ["1/2", "1/4", "1/3", "1/6"]);
    assert!((parsed.constants.r - 1606.922).abs() < 1e-3);
    assert!((parsed.constants.log10_rho + 30.05).abs() < 0.01);
    let text = stdout(&fracstab(&["approx", &data("example_5_1.json"), "--eps", "0.1"]));
    assert!(text.contains("beta: [1/2, 1/4, 1/3, 1/6]"));
}

#[test]
fn approx_rejects_zero_eps_and_singular_matrices() {
    let o = fracstab(&["approx", &data("example_5_1.json"), "--eps", "0"]);
    assert_eq!(o.status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "sing.json", r#"{"matrix": [[1, 2], [2, 4]], "orders": [0.5, 0.7]}"#);
    let o = fracstab(&["approx", &f, "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(65));
    assert!(stderr(&o).contains("singular"));
}

#[test]
fn approx_scalar_constants() {
    // a = alpha/2, b = alpha, c = 1, R = (|a11| + eps)^{1/a}.
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "one.json", r#"{"matrix": [[-1]], "orders": [0.5]}"#);
    let o = fracstab(&["approx", &f, "--eps", "1", "--json", "--no-meta"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let k = serde_json::from_str::<ApproxOutput>(&stdout(&o)).unwrap().constants;
    assert_eq!((k.a, k.b, k.c), (0.25, 0.5, 1.0));
    assert!((k.r - 16.0).abs() < 1e-12);
}

#[test]
fn simulate_example_6_1_tail_decreases() {
    let o = fracstab(&["simulate", &data("example_6_1.json"), "--t-final", "1000", "--thin", "log:10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,x4"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1..].iter().map(|x| x * x).sum::<f64>().sqrt())
        })
        .collect();
    let tail: Vec<f64> = rows.iter().filter(|r| r.0 >= 100.0).map(|r| r.1).collect();
    assert!(tail.len() > 5);
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn simulate_example_6_3_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = fracstab(&[
        "simulate",
        &data("example_6_3.json"),
        "--out",
        out.to_str().unwrap(),
        "--thin",
        "log:20",
        "--decay",
        "1000",
        "--json",
        "--no-meta",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: SimulateOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary.steps, 100_000);
    assert!(summary.decay.unwrap().exponent > 0.2);
    assert!(summary.newton_failures.is_empty());
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("t,x1,x2,x3\n"));
}

#[test]
fn simulate_rejects_short_horizon() {
    let o = fracstab(&["simulate", &data("example_6_3.json"), "--t-final", "0.01"]);
    assert_eq!(o.status.code(), Some(64));
    let o = fracstab(&["simulate", &data("example_4_1.json")]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn gershgorin_regions_and_sweep() {
    let o = fracstab(&["gershgorin", &data("example_6_3.json"), "--norm", "inf", "--json", "--no-meta"]);
    assert_eq!(o.status.code(), Some(2));
    let g: GershgorinOutput = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(g.regions.len(), 3);
    assert_eq!(g.regions[0].radius, 1.5);
    assert_eq!(g.prescreen, None);

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "dom.json", r#"{"matrix": [[-2, 1], [0.5, -1]], "orders": ["1/2", "1/3"]}"#);
    let o = fracstab(&["gershgorin", &f, "--sweep", "-1:1,-1:1", "--nx", "3", "--ny", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("re,im,sigma_min\n"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(fracstab(&["--help"]).status.code(), Some(0));
    assert_eq!(fracstab(&["--version"]).status.code(), Some(0));
}
