use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gibbsdiv(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbsdiv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GIBBSDIV_OUT")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

fn trapezoid(rows: &[(f64, f64)]) -> f64 {
    rows.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).expect("stderr is one JSON line")
}

#[test]
fn pdf_integrates_to_one_and_writes_manifest() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["pdf", "--alpha", "0.5", "--theta", "1", "--n", "10", "--k", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&dir.path().join("pdf.json"));
    assert!((meta["total_mass"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(meta["normalizer_method"], "closed");
    let rows = read_csv(&dir.path().join("pdf.csv"));
    assert!(rows.len() > 50);

    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "pdf");
    assert_eq!(manifest["seed"], 1);
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|x| x == "pdf.csv"));
    assert!(manifest["versions"]["gibbsdiv"].is_string());
}

#[test]
fn user_grid_is_honored() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(
        dir.path(),
        &["pdf", "--alpha", "0.5", "--theta", "1", "--n", "10", "--k", "3", "--grid", "0.001:12:4001"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("pdf.csv"));
    assert_eq!(rows.len(), 4001);
    assert!((rows[0].0 - 0.001).abs() < 1e-15);
    assert!((trapezoid(&rows) - 1.0).abs() < 1e-4);
}

#[test]
fn theta_zero_matches_gtilde() {
    let dir = TempDir::new().unwrap();
    let grid = "0.05:6:60";
    let pd = dir.path().join("pd");
    let gt = dir.path().join("gt");
    let base = ["pdf", "--alpha", "0.4", "--n", "7", "--k", "2", "--grid", grid];
    let a = gibbsdiv(&pd, &[&base[..], &["--theta", "0"]].concat());
    let b = gibbsdiv(&gt, &[&base[..], &["--model", "gtilde"]].concat());
    assert!(a.status.success() && b.status.success());
    let x = read_csv(&pd.join("pdf.csv"));
    let y = read_csv(&gt.join("pdf.csv"));
    for (p, q) in x.iter().zip(&y) {
        assert_eq!(p.0, q.0);
        assert!((p.1 - q.1).abs() <= 1e-8 * q.1.max(1e-300), "{p:?} vs {q:?}");
    }
}

#[test]
fn gg_sidecar_names_the_normalizer() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["pdf", "--model", "gg", "--alpha", "0.5", "--beta", "1", "--n", "6", "--k", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = read_json(&dir.path().join("pdf.json"));
    assert_eq!(meta["normalizer_method"], "sum");
    assert!((meta["total_mass"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn weights_table_starts_at_one() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["weights", "--alpha", "0.5", "--theta", "1", "--nmax", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&dir.path().join("weights.json"));
    assert!((summary["v11"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let text = fs::read_to_string(dir.path().join("weights.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 20 * 21 / 2);
}

#[test]
fn gg_weights_write_dual_forms() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["weights", "--model", "gg", "--alpha", "0.5", "--beta", "1", "--nmax", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("dual.csv").exists());
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = [
        "simulate", "--alpha", "0.5", "--theta", "1", "--n", "10", "--k", "3", "--m", "500", "--reps", "200", "--seed", "7",
    ];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(gibbsdiv(&a, &[&args[..], &["--jobs", "1"]].concat()).status.success());
    assert!(gibbsdiv(&b, &[&args[..], &["--jobs", "2"]].concat()).status.success());
    assert_eq!(fs::read(a.join("sample.csv")).unwrap(), fs::read(b.join("sample.csv")).unwrap());
    let meta = read_json(&a.join("sample.json"));
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["reps"], 200);
}

#[test]
fn zero_new_items_give_zero() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(
        dir.path(),
        &["simulate", "--alpha", "0.5", "--theta", "1", "--n", "10", "--k", "3", "--m", "0", "--reps", "1"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("sample.csv"));
    assert_eq!(rows, vec![(0.0, 0.0)]);
}

#[test]
fn moments_report_closed_form() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["moments", "--alpha", "0.5", "--theta", "1", "--n", "10", "--k", "3", "--order", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&dir.path().join("moments.json"));
    let first = m["moments"][1].as_f64().unwrap();
    assert!((first - 1.5247798041952718).abs() < 1e-10);
    assert_eq!(m["prop4"]["pass"], true);
}

#[test]
fn invalid_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["pdf", "--alpha", "1.2", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["exit_code"], 2);
    assert!(e["message"].as_str().unwrap().contains("alpha"));

    let o = gibbsdiv(dir.path(), &["pdf", "--alpha", "0.5", "--theta", "-0.7"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gibbsdiv(dir.path(), &["pdf", "--alpha", "0.5", "--theta", "1", "--n", "3", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn write_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    fs::create_dir_all(dir.path().join("pdf.csv")).unwrap();
    let o = gibbsdiv(dir.path(), &["pdf", "--alpha", "0.5", "--theta", "1", "--n", "10", "--k", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "io");
}

#[test]
fn failed_verification_exits_4_and_tol_overrides_apply() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(
        dir.path(),
        &["weights", "--model", "gg", "--alpha", "0.5", "--beta", "1", "--nmax", "10", "--tol", "recursion=1e-30"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["error"], "verification");
    assert!(dir.path().join("manifest.json").exists());

    let o = gibbsdiv(dir.path(), &["weights", "--alpha", "0.5", "--theta", "1", "--tol", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_stable_suite_passes() {
    let dir = TempDir::new().unwrap();
    let o = gibbsdiv(dir.path(), &["verify", "--suite", "stable"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v["failed"], 0);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}
