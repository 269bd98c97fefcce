use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hopf_core::ansatz::sigma2_profile;
use hopf_core::Charge;
use serde_json::Value;

fn hopfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopfkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_sigma2_writes_closed_form_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopfkit(&["solve", "--k", "2", "--l", "1", "--type", "sigma2", "--json", "--out", path_str(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["status"], "ok");
    assert_eq!(report["residual"]["equation"], "sigma2-bracket");
    assert!(report["residual"]["grid_size"].as_u64().unwrap() > 900);
    let (header, rows) = csv_rows(&dir.path().join("profile.csv"));
    assert_eq!(header, ["s", "alpha"]);
    let exact = sigma2_profile(Charge::new(2, 1).unwrap());
    for row in &rows {
        let (s, a): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        assert!((a - exact.alpha(s)).abs() < 1e-8, "s = {s}");
    }
    let (header, _) = csv_rows(&dir.path().join("residuals.csv"));
    assert_eq!(header, ["s", "residual", "scale"]);
    let file: Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(file, report);
}

#[test]
fn solve_harmonic_without_solution_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopfkit(&["solve", "--k", "2", "--l", "1", "--type", "harmonic", "--json", "--out", path_str(dir.path())]);
    assert_eq!(code(&o), 2);
    let report = json(&o);
    assert_eq!(report["status"], "no-solution");
    assert_eq!(report["scan"]["sign_constant"], true);
    let (header, rows) = csv_rows(&dir.path().join("scan.csv"));
    assert_eq!(header, ["slope", "mismatch"]);
    assert_eq!(rows.len(), report["scan"]["points"].as_u64().unwrap() as usize);
}

#[test]
fn solve_hc_for_the_hopf_charge_is_linear() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopfkit(&["solve", "--k", "1", "--l", "1", "--type", "hc", "-q", "--out", path_str(dir.path())]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let (_, rows) = csv_rows(&dir.path().join("profile.csv"));
    for row in &rows {
        let (s, a): (f64, f64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        assert!((a - 2.0 * s).abs() < 1e-12, "s = {s}");
    }
}

#[test]
fn energy_reports() {
    let o = hopfkit(&["energy", "--k", "1", "--l", "1", "--R", "1", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!((num(&r, "e_sigma2") / (16.0 * PI * PI) - 1.0).abs() < 1e-8);
    for key in ["k", "l", "Q", "R", "K", "e_sigma1", "e_sigma2", "e_full", "bound", "bound_ratio"] {
        assert!(!r[key].is_null(), "{key}");
    }
    assert_eq!(r["quad"]["panels"], 64);

    let dir = tempfile::tempdir().unwrap();
    let o = hopfkit(&["energy", "--k", "2", "--l", "1", "--K", "0.5", "--json", "--out", path_str(dir.path())]);
    let r = json(&o);
    assert!((num(&r, "e_full") - (num(&r, "e_sigma1") + 0.5 * num(&r, "e_sigma2"))).abs() < 1e-12 * num(&r, "e_full"));
    let (header, rows) = csv_rows(&dir.path().join("plot.csv"));
    assert_eq!(header, ["s", "sigma1_integrand", "sigma2_integrand"]);
    assert_eq!(rows.len(), 255);
}

#[test]
fn flow_output_feeds_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopfkit(&["flow", "--k", "2", "--l", "1", "--init", "linear", "--steps", "20000", "--json", "--out", path_str(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["converged"], true);
    assert!(num(&r, "closed_form_deviation") < 1e-4);
    let (header, rows) = csv_rows(&dir.path().join("history.csv"));
    assert_eq!(header, ["step", "energy", "grad_norm", "step_size"]);
    assert_eq!(rows.len(), r["steps"].as_u64().unwrap() as usize + 1);

    let profile = dir.path().join("profile.csv");
    let o = hopfkit(&["energy", "--k", "2", "--l", "1", "--profile", path_str(&profile), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert!((num(&r, "e_sigma2") / num(&r, "e_sigma2_closed") - 1.0).abs() < 1e-6);
}

#[test]
fn flow_examples() {
    let r = json(&hopfkit(&["flow", "--k", "1", "--l", "1", "--init", "closed-form", "--json"]));
    assert_eq!(r["steps"], 0);
    let o = hopfkit(&["flow", "--k", "3", "--l", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!((num(&r, "energy") / (144.0 * PI * PI) - 1.0).abs() < 1e-6);
}

#[test]
fn malformed_profile_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "s,alpha\n0,0\n0.5,oops\n1.5707963267948966,3.141592653589793\n").unwrap();
    let o = hopfkit(&["energy", "--profile", path_str(&path)]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.csv:3:"), "{err}");
}

#[test]
fn scan_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = hopfkit(&["scan", "--k-max", "3", "--threads", "3", "--out", path_str(dir.path())]);
    assert_eq!(code(&o), 0);
    let written = fs::read(dir.path().join("scan.csv")).unwrap();
    assert_eq!(o.stdout, written);
    let (header, rows) = csv_rows(&dir.path().join("scan.csv"));
    assert_eq!(header, ["k", "l", "Q", "e_closed", "e_quadrature", "bound", "ratio", "error"]);
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let (k, l): (i64, i64) = (row[0].parse().unwrap(), row[1].parse().unwrap());
        let ratio: f64 = row[6].parse().unwrap();
        if k == l {
            assert!((ratio - 1.0).abs() < 1e-10);
        }
        if (k, l) == (2, 1) {
            assert!((ratio - 1.0820).abs() < 1e-4);
        }
        if (k, l) == (3, 1) {
            let e: f64 = row[4].parse().unwrap();
            assert!((e / (16.0 * PI * PI * 8.0 / 9f64.ln()) - 1.0).abs() < 1e-10);
        }
        assert!(row[7].is_empty());
    }
    let single = hopfkit(&["scan", "--k-max", "3", "--threads", "1"]);
    assert_eq!(single.stdout, written);
}

#[test]
fn metric_recipes() {
    let r = hopfkit(&["metric", "--recipe", "biconformal-hc", "--k", "2", "--l", "1", "--json"]);
    assert_eq!(code(&r), 0);
    assert!(num(&json(&r)["details"], "spectrum_error") < 1e-9);
    let r = hopfkit(&["metric", "--recipe", "remark-c", "--k", "2", "--l", "1", "--K", "1", "--json"]);
    assert_eq!(code(&r), 0);
    assert!(num(&json(&r), "residual") < 1e-6);
    let r = hopfkit(&["metric", "--recipe", "lemma-le", "--p", "1", "--k", "2", "--l", "1", "--json"]);
    assert_eq!(code(&r), 3);
    let v = json(&r);
    assert_eq!(v["status"], "violation");
    assert!(num(&v, "predicate") > 1e-3);
    let r = hopfkit(&["metric", "--recipe", "lemma-le", "--p", "2", "--k", "2", "--l", "1", "-q"]);
    assert_eq!(code(&r), 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# charge\nk = 3\nl = 1\nradius = 2\njson = true\n").unwrap();
    let r = json(&hopfkit(&["energy", "--config", path_str(&cfg), "--k", "2"]));
    assert_eq!((r["k"].as_i64(), r["l"].as_i64(), num(&r, "R")), (Some(2), Some(1), 2.0));

    fs::write(&cfg, "k = 3\nwidth = 4\n").unwrap();
    let o = hopfkit(&["energy", "--config", path_str(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.cfg:2:"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = hopfkit(&["solve", "--k", "3", "--l", "2", "-q", "--out", path_str(d.path())]);
        assert_eq!(code(&o), 0);
        let o = hopfkit(&["energy", "--k", "3", "--l", "2", "-q", "--out", path_str(&d.path().join("e"))]);
        assert_eq!(code(&o), 0);
    }
    for name in ["profile.csv", "residuals.csv", "report.json", "e/report.json", "e/plot.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&hopfkit(&["solve", "--type", "nope"])), 1);
    assert_eq!(code(&hopfkit(&["energy", "--k", "0"])), 1);
    assert_eq!(code(&hopfkit(&["energy", "--R", "-1"])), 1);
    assert_eq!(code(&hopfkit(&["--help"])), 0);
}
