use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const STANDARD: &str = r#"{"model": {"drift": 1.0, "sigma": 0.0, "jumps": {"family": "exp_cp", "lambda": 2.0, "mu": 1.0}}, "q": 0.1, "S": 0.0}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], problem: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdiv"))
        .args(args)
        .arg("--problem")
        .arg(problem)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn scale_table_shape_and_monotonicity() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", STANDARD);
    let o = run(&["scale-table", "--x-max", "5", "--x-steps", "11"], &p);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "x,W,Z,Wbar,Zbar");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[10][0], 5.0);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][1] >= w[0][1]);
        assert!(w[1][2] >= w[0][2]);
    }
    assert_eq!(rows[0][1], 1.0);
    assert_eq!(rows[0][2], 1.0);
}

#[test]
fn solve_prints_summary_then_table() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", STANDARD);
    let o = run(&["solve", "--x-max", "4", "--x-steps", "9"], &p);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# b* = "));
    assert!(text.lines().any(|l| l == "x,V,Vprime"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert!(r[2] >= 1.0 - 1e-12);
    }
}

#[test]
fn large_terminal_value_pays_everything() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", &STANDARD.replace(r#""S": 0.0"#, r#""S": 12.0"#));
    let o = run(&["solve", "--x-max", "3", "--x-steps", "4"], &p);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# b* = 0\n"));
    for r in csv_rows(&text) {
        assert_eq!(r[1], r[0] + 12.0);
        assert_eq!(r[2], 1.0);
    }
}

#[test]
fn out_flag_splits_table_from_summary() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", STANDARD);
    let out = dir.path().join("v.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_spdiv"))
        .args(["solve", "--x-steps", "5", "--problem"])
        .arg(&p)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.starts_with('#')));
    let table = fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("x,V,Vprime\n"));
    assert_eq!(table.lines().count(), 6);
}

#[test]
fn malformed_problem_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", r#"{"model": {"drift": 1.0,"#);
    let o = run(&["solve"], &p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));

    let unknown = write(&dir, "unknown.json", &STANDARD.replace(r#""q""#, r#""rate""#));
    assert_eq!(run(&["solve"], &unknown).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["solve"], &missing).status.code(), Some(2));
}

#[test]
fn model_without_positive_mean_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", &STANDARD.replace(r#""drift": 1.0"#, r#""drift": 3.0"#));
    let o = run(&["solve"], &p);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_detects_an_injected_fault() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", STANDARD);
    let args = ["verify", "dividends", "--paths", "20000", "--b-steps", "10", "--x-steps", "10"];
    let o = run(&args, &p);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));

    let mut faulty = args.to_vec();
    faulty.extend(["--inject-fault", "flip-lambda-sign"]);
    let o = run(&faulty, &p);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn simulate_reports_every_functional() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", STANDARD);
    let o = run(&["simulate", "--paths", "2000", "--barrier", "2", "--x0", "1"], &p);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["dividends", "terminal", "value"] {
        for field in ["mean", "se", "n", "censored_fraction"] {
            assert!(v[key][field].is_number(), "{key}.{field}");
        }
    }
    assert_eq!(v["value"]["n"], 2000);
    assert_eq!(v["barrier"], 2.0);
    assert!(v["analytic_value"].is_number());
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", STANDARD);
    for args in [
        vec!["simulate", "--paths", "1000", "--seed", "7"],
        vec!["solve", "--x-steps", "21"],
        vec!["scale-table", "--x-steps", "21"],
    ] {
        assert_eq!(run(&args, &p).stdout, run(&args, &p).stdout, "{args:?}");
    }
}
