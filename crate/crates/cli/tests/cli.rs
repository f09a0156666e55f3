use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn loja(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loja")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn demo_cusp_matches_golden_values() {
    let out = loja(&["demo-cusp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["schema"], "loja-lab/1");
    assert_eq!(r["command"], "demo-cusp");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    let leaf = &r["result"]["leaf"];
    let leaf_poly = loja_core::parse(leaf["total_transform"].as_str().unwrap()).unwrap();
    assert_eq!(leaf_poly, loja_core::parse("alpha^6*beta^2 - alpha^6*beta^3").unwrap());
    assert_eq!(leaf["monomial"], serde_json::json!([6, 2]));
    assert_eq!(leaf["N"], 8);
    assert_eq!(leaf["theta_bound"], "7/8");
    assert_eq!(r["result"]["translated"]["N"], 7);
    assert_eq!(r["result"]["translated"]["theta_bound"], "6/7");
    for step in r["result"]["steps"].as_array().unwrap() {
        assert_eq!(step["match"], true, "{step}");
    }
}

#[test]
fn analyze_normal_crossing_product() {
    let out = loja(&["analyze", "x1*x2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["analysis"]["theta"], "1/2");
    assert_eq!(r["result"]["analysis"]["optimal"], true);
    assert_eq!(r["config"]["input"], "x1*x2");
    assert_eq!(r["config"]["seed"], 0);
}

#[test]
fn analyze_haraux_fails_with_code_2() {
    let out = loja(&["analyze", "haraux"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn estimate_cusp() {
    let out = loja(&["estimate", "x^2 - y^3"]);
    assert_eq!(out.status.code(), Some(0));
    let t = report(&out)["result"]["estimate"]["theta_hat"].as_f64().unwrap();
    assert!((t - 2.0 / 3.0).abs() < 0.02, "{t}");
}

#[test]
fn estimate_against_prior_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res");
    let out = loja(&["resolve", "x^2 - y^3", "--output-path", res.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let prior = res.join("report.json");
    let out = loja(&["estimate", "x^2 - y^3", "--prior", prior.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"].as_str().unwrap().contains("consistent")), "{}", r["checks"]);
}

#[test]
fn reports_are_identical_across_worker_counts() {
    for args in [&["estimate", "x^2 - y^3"][..], &["analyze", "x^2*y^2"], &["flow", "x^2*y^2", "--point", "0.3,0.4"]] {
        let one = loja(&[args, &["--workers", "1"]].concat());
        let four = loja(&[args, &["--workers", "4"]].concat());
        assert_eq!(one.status.code(), Some(0), "{args:?}");
        assert_eq!(one.stdout, four.stdout, "{args:?}");
        assert_eq!(loja(&[args, &["--workers", "1"]].concat()).stdout, one.stdout, "{args:?}");
    }
}

#[test]
fn output_files_have_fixed_names() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let out = loja(&["flow", "x^2", "--point", "0.5", "--output-path", path]);
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(written, report(&out));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x_1,E,grad_norm,arc_length\n"), "{csv:.80}");

    let out = loja(&["estimate", "x1*x2", "--output-path", path]);
    assert_eq!(out.status.code(), Some(0));
    let env = std::fs::read_to_string(dir.path().join("envelope.csv")).unwrap();
    assert!(env.starts_with("radius,ratio\n"));
    assert!(env.lines().count() > 10);
}

#[test]
fn polynomial_from_stdin() {
    let mut child =
        Command::new(env!("CARGO_BIN_EXE_loja")).args(["analyze", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(b"x^2*y^2\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["input"], "x^2*y^2");
    assert_eq!(r["result"]["analysis"]["theta"], "3/4");
}

#[test]
fn usage_and_parse_errors_exit_1() {
    assert_eq!(loja(&["analyze", "x^^2"]).status.code(), Some(1));
    assert_eq!(loja(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(loja(&["flow", "x^2"]).status.code(), Some(1));
    assert_eq!(loja(&["verify", "x^2", "--k", "a,b"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(loja(&["estimate", "x^2", "--prior", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn human_and_csv_formats() {
    let out = loja(&["analyze", "x1*x2", "--format", "human"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("analyze: PASS"), "{text}");
    let out = loja(&["estimate", "x1*x2", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("radius,ratio"));
}

#[test]
fn verify_battery() {
    assert_eq!(loja(&["verify", "x^2 + y^2", "--k", "origin"]).status.code(), Some(0));
    let out = loja(&["verify", "x^3 + x^2*y^5", "--k", "1", "--order", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
