use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use xyqmc::boundary::{alpha0, diagonal_orbit_closed_form};

fn xyqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xyqmc")).args(args).output().unwrap()
}

fn xyqmc_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_xyqmc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Vec<Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.starts_with("termination="))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn observable_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn solve_boundary_fixed_point_family() {
    let out = xyqmc(&["solve-boundary", "--beta", "1", "--alpha", "auto", "--levels", "4"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    assert!((num(&r["alpha"]) - alpha0(1.0)).abs() <= 1e-15);
    assert_eq!(r["h_levels"].as_array().unwrap().len(), 5);
    assert!(num(&r["eq1_residual"]) <= 1e-12);
    for e in r["eq2_residual_per_level"].as_array().unwrap() {
        assert!(num(e) <= 1e-12);
    }
    for h in r["h_levels"].as_array().unwrap() {
        assert!((num(&h[0][0][0]) - alpha0(1.0)).abs() <= 1e-15);
    }
}

#[test]
fn solve_boundary_any_alpha_meets_eq1() {
    let out = xyqmc(&["solve-boundary", "--alpha", "2", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    assert!(num(&json(&out)[0]["eq1_residual"]) <= 1e-12);
}

#[test]
fn nonpositive_parameters_are_usage_errors() {
    assert_eq!(code(&xyqmc(&["solve-boundary", "--beta", "-1"])), 2);
    assert_eq!(code(&xyqmc(&["solve-boundary", "--beta", "1", "--alpha", "0"])), 2);
    assert_eq!(code(&xyqmc(&["free-energy", "--beta-min", "0", "--beta-max", "1", "--beta-steps", "3"])), 2);
    assert_eq!(code(&xyqmc(&["free-energy", "--beta-min", "1", "--beta-max", "2"])), 2);
    assert_eq!(code(&xyqmc(&["free-energy", "--beta", "1", "--beta-min", "1"])), 2);
    assert_eq!(code(&xyqmc(&["verify", "--suite", "model", "--tol", "-1"])), 2);
}

#[test]
fn diagonal_orbit_converges_along_closed_form() {
    let out = xyqmc(&["orbit", "--x0", "1", "--y0", "0", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("step,x,y,admissible\n"));
    assert_eq!(text.lines().last().unwrap(), "termination=Converged");
    for row in csv_rows(&text) {
        let step: u32 = row[0].parse().unwrap();
        let x: f64 = row[1].parse().unwrap();
        let exact = diagonal_orbit_closed_form(1.0, 1.0, step);
        assert!((x - exact).abs() <= 1e-10 * exact);
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[3], "1");
    }
}

#[test]
fn off_diagonal_orbit_dies() {
    let out = xyqmc(&["orbit", "--x0", "1", "--y0", "0.5", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let last = stdout(&out).lines().last().unwrap().to_string();
    let step: usize = last.strip_prefix("termination=DomainViolation@").unwrap().parse().unwrap();
    assert_eq!(csv_rows(&stdout(&out)).len(), step);
}

#[test]
fn fixed_point_orbit_converges_at_once() {
    let x0 = format!("{:.17e}", alpha0(1.0));
    let out = xyqmc(&["orbit", "--x0", &x0, "--y0", "0", "--beta", "1"]);
    assert_eq!(csv_rows(&stdout(&out)).len(), 2);
    assert_eq!(stdout(&out).lines().last().unwrap(), "termination=Converged");
    let j = json(&xyqmc(&["orbit", "--x0", &x0, "--y0", "0", "--beta", "1", "--out", "json"]));
    assert_eq!(j[0]["termination"], "Converged");
    assert_eq!(j[0]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn orbit_outside_domain_is_usage_error() {
    assert_eq!(code(&xyqmc(&["orbit", "--x0", "1", "--y0", "2"])), 2);
    assert_eq!(code(&xyqmc(&["orbit", "--x0", "1", "--y0", "-0.1"])), 2);
}

#[test]
fn periodic_search_schema() {
    let out = xyqmc(&["orbit", "--periodic", "--beta", "1", "--samples", "30", "--seed", "4"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    assert_eq!(num(&r["beta"]), 1.0);
    assert_eq!(r["samples"], 30);
    assert!(r["hits"].as_array().unwrap().is_empty());
}

#[test]
fn verify_compat() {
    let out = xyqmc(&["verify", "--suite", "compat", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    assert_eq!(r["passed"], true);
    let projectivity: Vec<_> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"] == "projectivity_dense")
        .collect();
    assert_eq!(projectivity.len(), 2);
    assert!(projectivity.iter().all(|c| num(&c["value"]) <= 1e-12));
}

#[test]
fn verify_appendix() {
    let out = xyqmc(&["verify", "--suite", "appendix"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    let min_p = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "min_p_on_(1,100]").unwrap();
    assert!(num(&min_p["value"]) > 0.0);
}

#[test]
fn verify_uniqueness() {
    let out = xyqmc(&["verify", "--suite", "uniqueness", "--n", "2"]);
    assert_eq!(code(&out), 0);
    for c in json(&out)[0]["checks"].as_array().unwrap() {
        assert!(num(&c["value"]) <= 1e-10);
    }
}

#[test]
fn verify_model_and_boundary() {
    for suite in ["model", "boundary"] {
        let out = xyqmc(&["verify", "--suite", suite, "--out", "csv"]);
        assert_eq!(code(&out), 0, "{suite}");
        for row in csv_rows(&stdout(&out)) {
            assert_eq!(row.last().unwrap(), "1", "{row:?}");
        }
    }
}

#[test]
fn verify_reports_failures_with_exit_one() {
    let out = xyqmc(&["verify", "--suite", "model", "--tol", "1e-30"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)[0]["passed"], false);
    assert_eq!(code(&xyqmc(&["verify", "--suite", "nope"])), 2);
}

#[test]
fn expect_identity_and_spin_flip() {
    let id = observable_file(r#"{"terms":[{"coeff":[1,0]}]}"#);
    let out = xyqmc(&["expect", id.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    assert!((num(&r["value"][0]) - 1.0).abs() <= 1e-12);
    assert!(num(&r["value"][1]).abs() <= 1e-12);
    for key in ["n", "beta", "alpha", "engine", "value", "residuals"] {
        assert!(r.get(key).is_some(), "{key}");
    }

    let z = observable_file(r#"{"terms":[{"factors":[{"vertex":"","pauli":"z"}]}]}"#);
    for engine in ["dense", "transfer", "auto"] {
        let out = xyqmc(&["expect", z.path().to_str().unwrap(), "--beta", "1", "--n", "2", "--engine", engine]);
        assert_eq!(code(&out), 0);
        let r = &json(&out)[0];
        assert!(num(&r["value"][0]).abs() <= 1e-10 && num(&r["value"][1]).abs() <= 1e-10);
    }
}

#[test]
fn expect_both_engines() {
    let obs = observable_file(
        r#"{"terms":[{"coeff":[0.5,0.25],"factors":[{"vertex":"1","pauli":"x"},{"vertex":"2.1","pauli":"y"}]},
                     {"factors":[{"vertex":"","matrix":[[[1,0],[0,2]],[[0,-2],[3,0]]]}]}]}"#,
    );
    let out = xyqmc(&["expect", obs.path().to_str().unwrap(), "--n", "2", "--alpha", "0.7", "--engine", "both"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    assert_eq!(r["engine"], "both");
    assert!(num(&r["gap"]) <= 1e-10);
    for i in 0..2 {
        assert!((num(&r["dense"][i]) - num(&r["transfer"][i])).abs() <= 1e-10);
    }
}

#[test]
fn expect_reads_stdin() {
    let out = xyqmc_stdin(&["expect", "-", "--n", "3"], r#"{"terms":[{"factors":[{"vertex":"1.1.1","pauli":"i"}]}]}"#);
    assert_eq!(code(&out), 0);
    let r = &json(&out)[0];
    assert_eq!(r["engine"], "transfer");
    assert!((num(&r["value"][0]) - 1.0).abs() <= 1e-12);
}

#[test]
fn expect_errors() {
    let bad = observable_file("{\"terms\":[\n{\"factors\":[{\"vertex\":\"1\",\"pauli\":\"w\"}]}]}");
    let out = xyqmc(&["expect", bad.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");

    assert_eq!(code(&xyqmc(&["expect", "/nonexistent/obs.json"])), 2);

    let deep = observable_file(r#"{"terms":[{"factors":[{"vertex":"1.1","pauli":"x"}]}]}"#);
    let path = deep.path().to_str().unwrap();
    assert_eq!(code(&xyqmc(&["expect", path, "--n", "1"])), 3);
    assert_eq!(code(&xyqmc(&["expect", path, "--n", "3", "--engine", "dense"])), 3);
    assert_eq!(code(&xyqmc(&["expect", path, "--n", "13", "--engine", "transfer"])), 3);
}

#[test]
fn free_energy_rows() {
    let out = xyqmc(&["free-energy", "--beta", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("beta,F_n,F_limit,abs_gap\n"));
    let row = &csv_rows(&text)[0];
    assert!((row[2].parse::<f64>().unwrap() - 1.735_123_6).abs() <= 1e-6);
    assert!(row[3].parse::<f64>().unwrap() <= 1e-5);

    let small = csv_rows(&stdout(&xyqmc(&["free-energy", "--beta", "1e-4"])))[0][2].parse::<f64>().unwrap();
    assert!((small - 2e-4).abs() <= 1e-9);

    let mut last = f64::INFINITY;
    for n in 1..=12 {
        let out = xyqmc(&["free-energy", "--beta", "1", "--n", &n.to_string(), "--out", "json"]);
        let gap = num(&json(&out)[0]["abs_gap"]);
        assert!(gap < last);
        last = gap;
    }
}

#[test]
fn outputs_are_deterministic_and_finite() {
    let runs = [
        vec!["verify", "--suite", "boundary", "--beta-min", "0.5", "--beta-max", "2", "--beta-steps", "4", "--seed", "7"],
        vec!["free-energy", "--beta-min", "0.01", "--beta-max", "10", "--beta-steps", "50"],
        vec!["solve-boundary", "--beta-min", "0.1", "--beta-max", "3", "--beta-steps", "5", "--out", "csv"],
    ];
    for args in &runs {
        let single = Command::new(env!("CARGO_BIN_EXE_xyqmc"))
            .args(args)
            .env("RAYON_NUM_THREADS", "1")
            .output()
            .unwrap();
        let many = Command::new(env!("CARGO_BIN_EXE_xyqmc"))
            .args(args)
            .env("RAYON_NUM_THREADS", "4")
            .output()
            .unwrap();
        assert_eq!(single.stdout, many.stdout, "{args:?}");
        let text = stdout(&single);
        assert!(!text.contains("null") && !text.to_lowercase().contains("nan") && !text.contains("inf"));
    }
    let a = xyqmc(&["verify", "--suite", "uniqueness", "--seed", "1"]);
    let b = xyqmc(&["verify", "--suite", "uniqueness", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}
