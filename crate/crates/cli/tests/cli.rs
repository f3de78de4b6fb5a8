use std::process::{Command, Output};

use serde_json::Value;

fn bihydro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bihydro"))
        .args(args)
        .output()
        .expect("spawn bihydro")
}

fn stdout(args: &[&str]) -> String {
    let out = bihydro(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let doc: Value = serde_json::from_str(&stdout(args)).unwrap();
    assert_eq!(doc["schema"], 1);
    doc["result"].clone()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

/// Asserts a failing run with a single JSON line carrying `code` on stderr.
fn assert_error(args: &[&str], code: &str) {
    let out = bihydro(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "stderr: {err}");
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"]["code"], code, "stderr: {err}");
}

#[test]
fn potential_default_grid() {
    let (header, rows) = csv_rows(&stdout(&["potential"]));
    assert_eq!(header, ["rho", "Z", "W"]);
    assert_eq!(rows.len(), 1001);
    assert_eq!(rows[0], ["0", "0", "-1.854074677"]);
    assert_eq!(rows[1000][0], "10");
}

#[test]
fn potential_two_points() {
    let (_, rows) = csv_rows(&stdout(&["potential", "--points", "2"]));
    assert_eq!(rows.len(), 2);
}

#[test]
fn potential_maximum_of_z() {
    let (_, rows) = csv_rows(&stdout(&["potential", "--rho-max", "3"]));
    let (rho, _) =
        rows.iter()
            .map(|r| (num(&r[0]), num(&r[1])))
            .fold(
                (0.0, f64::MIN),
                |best, p| if p.1 > best.1 { p } else { best },
            );
    assert!((rho - 2.1396).abs() < 2e-3, "argmax {rho}");
}

#[test]
fn potential_json_matches_csv() {
    let args = ["potential", "--rho-max", "2", "--points", "5"];
    let (_, rows) = csv_rows(&stdout(&args));
    let doc = json(&[&args[..], &["--format", "json"]].concat());
    let arr = doc.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (j, c) in arr.iter().zip(&rows) {
        assert_eq!(j["rho"].as_f64().unwrap(), num(&c[0]));
        assert_eq!(j["Z"].as_f64().unwrap(), num(&c[1]));
        assert_eq!(j["W"].as_f64().unwrap(), num(&c[2]));
    }
}

#[test]
fn golden_outputs() {
    assert_eq!(
        stdout(&["potential", "--rho-max", "2", "--points", "5"]),
        include_str!("golden/potential_small.csv")
    );
    assert_eq!(stdout(&["table1"]), include_str!("golden/table1.csv"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    for args in [
        &["potential", "--points", "101"][..],
        &["fit", "--format", "csv"],
        &["solve", "--nu", "2.5"],
        &["table1", "--format", "json"],
    ] {
        assert_eq!(bihydro(args).stdout, bihydro(args).stdout, "{args:?}");
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    let p = path.to_str().unwrap();
    let out = bihydro(&["solve", "--output", p]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&["solve"]));
}

#[test]
fn fit_default_is_close_to_published() {
    let r = json(&["fit"]);
    assert_eq!(r["converged"], true);
    let p = &r["params"];
    for (key, reference) in [
        ("g", -1.83),
        ("v0", 0.09805),
        ("kappa", 0.5852),
        ("b", -0.4572),
    ] {
        let v = p[key].as_f64().unwrap();
        assert!(((v - reference) / reference).abs() < 0.05, "{key} = {v}");
    }
    assert!(r["max_abs_residual"].as_f64().unwrap() <= 0.014_746_549_576_542_728);
}

#[test]
fn fit_from_published_start() {
    let r = json(&["fit", "--init-from-paper"]);
    assert!(r["iterations"].as_u64().unwrap() <= 50);
}

#[test]
fn fit_csv_columns() {
    let (header, rows) = csv_rows(&stdout(&["fit", "--format", "csv"]));
    assert_eq!(header, ["rho", "W_exact", "W_morse", "residual"]);
    assert_eq!(rows.len(), 200);
    let max = rows.iter().map(|r| num(&r[3]).abs()).fold(0.0, f64::max);
    assert!(max <= 0.014_746_549_576_542_728, "max residual {max}");
    for r in &rows {
        assert!((num(&r[2]) - num(&r[1]) - num(&r[3])).abs() < 1e-8);
    }
}

#[test]
fn solve_published_nu() {
    let r = json(&["solve", "--nu", "2.89873"]);
    assert!((r["alpha_beta"].as_f64().unwrap() - 1.823_373_498).abs() < 1e-3);
    assert!((r["eps_over_alpha2"].as_f64().unwrap() + 0.499_733_119_5).abs() < 1e-4);
}

#[test]
fn calibrate_empirical_target() {
    let r = json(&["calibrate", "--target", "-0.49973"]);
    assert!((r["nu"].as_f64().unwrap() - 2.89873).abs() < 1e-3);
}

#[test]
fn oracle_exact_potential() {
    let r = json(&["oracle", "--potential", "bic", "--alpha-beta", "1.83297"]);
    assert!((r["eps_over_alpha2"].as_f64().unwrap() + 0.5).abs() < 5e-4);
    assert_eq!(r["node_count"], 0);
}

#[test]
fn oracle_coulomb_and_morse() {
    let r = json(&["oracle", "--potential", "coulomb", "--alpha-beta", "1.3"]);
    assert!((r["eps_over_alpha2"].as_f64().unwrap() + 0.5).abs() < 1e-5);
    let r = json(&[
        "oracle",
        "--potential",
        "morse",
        "--alpha-beta",
        "1.823373498",
    ]);
    assert!((r["eps_over_alpha2"].as_f64().unwrap() + 0.499_733_119_5).abs() < 1e-3);
}

#[test]
fn table1_rows_pass() {
    let (header, rows) = csv_rows(&stdout(&["table1"]));
    assert_eq!(header.last().unwrap(), "pass");
    let labels: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["morse_analytic", "numerov_exact_bic", "empirical"]);
    assert!(rows.iter().all(|r| r.last().unwrap() == "true"));

    let doc = json(&["table1", "--format", "json"]);
    let rows = doc.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["pass"] == true));
}

#[test]
fn failures_exit_nonzero_with_code() {
    assert_error(&["calibrate", "--target", "5"], "BRACKETING");
    assert_error(&["oracle", "--step", "0.5"], "INVALID_INPUT");
    assert_error(&["oracle", "--alpha-beta", "-1"], "INVALID_INPUT");
    assert_error(
        &["oracle", "--potential", "bic", "--radius", "60"],
        "INVALID_INPUT",
    );
    assert_error(&["potential", "--points", "1"], "INVALID_INPUT");
    assert_error(&["solve", "--kappa", "0"], "INVALID_INPUT");
    assert_error(
        &["fit", "--objective", "least-squares", "--max-iters", "1"],
        "NON_CONVERGENCE",
    );
    assert_error(&["frobnicate"], "USAGE");
    assert_error(&["solve", "--nu", "abc"], "USAGE");
    assert_error(&["potential", "--output", "/nonexistent/dir/out.csv"], "IO");
}
