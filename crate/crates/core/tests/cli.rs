use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blockspec::ensemble::EmpiricalSpectrum;
use blockspec::harness::{CompareReport, GapReport, TailBoundResult};
use blockspec::limit::SpectralDensity;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockspec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/cli")
}

fn check_golden(produced: &Path, name: &str) {
    let path = golden_dir().join(name);
    let body = fs::read(produced).unwrap();
    if std::env::var_os("BLOCKSPEC_BLESS").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, &body).unwrap();
    }
    let expected = fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert!(body == expected, "{name} differs from its golden file");
}

// Runs the command with `-o <dir>/<stem>.<ext>` and returns that path.
fn run_to(dir: &Path, stem: &str, ext: &str, args: &[&str]) -> PathBuf {
    let out = dir.join(format!("{stem}.{ext}"));
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_owned();
    full.extend(["-o", &out_str]);
    let res = run(&full);
    assert!(res.status.success(), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
    out
}

const SAMPLE: &[&str] = &["sample", "--n", "12", "--p", "2", "--gamma", "2,8", "--seed", "42", "--scaled"];
const ROOTS: &[&str] = &["roots", "--n", "12", "--p", "3", "--gamma", "1,4,25"];
const DENSITY: &[&str] = &["density", "--p", "2", "--gamma", "2,8", "--grid", "200"];
const ORACLE: &[&str] = &["oracle", "--p", "2", "--gamma", "2,8", "--grid", "200"];
const COMPARE: &[&str] =
    &["compare", "--n", "60", "--p", "2", "--gamma", "2,8", "--trials", "3", "--seed", "5", "--grid", "200"];
const GAP: &[&str] =
    &["gap", "--n-list", "20,40", "--p", "1", "--gamma", "1", "--trials", "4", "--seed", "7", "--epsilon", "3"];

#[test]
fn csv_outputs_match_golden_files_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    for (stem, args) in [("sample", SAMPLE), ("roots", ROOTS)] {
        let csv = run_to(dir.path(), stem, "csv", args);
        check_golden(&csv, &format!("{stem}.csv"));
        check_golden(&csv.with_extension("json"), &format!("{stem}.json"));
        let spec = EmpiricalSpectrum::from_csv(
            &fs::read_to_string(&csv).unwrap(),
            &fs::read_to_string(csv.with_extension("json")).unwrap(),
        )
        .unwrap();
        assert_eq!(spec.values.len(), 12);
        assert_eq!(spec.scaled, stem == "sample");
    }
    for (stem, args) in [("density", DENSITY), ("oracle", ORACLE)] {
        let csv = run_to(dir.path(), stem, "csv", args);
        check_golden(&csv, &format!("{stem}.csv"));
        check_golden(&csv.with_extension("json"), &format!("{stem}.json"));
        let d = SpectralDensity::from_csv(
            &fs::read_to_string(&csv).unwrap(),
            &fs::read_to_string(csv.with_extension("json")).unwrap(),
        )
        .unwrap();
        assert_eq!(d.grid.len(), 201);
        assert_eq!(*d.cdf.last().unwrap(), 1.0);
    }
}

#[test]
fn json_reports_match_golden_files_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = run_to(dir.path(), "compare", "json", COMPARE);
    check_golden(&path, "compare.json");
    let report: CompareReport = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.per_trial.len(), 3);
    assert_eq!(report.summary.bound_checks.passed, 3);

    let path = run_to(dir.path(), "gap", "json", GAP);
    check_golden(&path, "gap.json");
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let reports: Vec<GapReport> = serde_json::from_value(v["reports"].clone()).unwrap();
    assert_eq!(reports.iter().map(|r| r.n).collect::<Vec<_>>(), vec![20, 40]);
    let tail: Vec<TailBoundResult> = serde_json::from_value(v["tail"].clone()).unwrap();
    assert_eq!(tail.len(), 2);
    assert!(tail.iter().all(|t| t.holds));
}

#[test]
fn figure_writes_three_tables_with_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let res = run(&["figure", "--name", "fig4", "--n", "60", "--seed", "1", "--grid", "200", "--out-dir", d]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for part in ["spectrum", "hist", "density"] {
        for ext in ["csv", "json"] {
            let name = format!("fig4_{part}.{ext}");
            check_golden(&dir.path().join(&name), &name);
        }
    }
    let spec = EmpiricalSpectrum::from_csv(
        &fs::read_to_string(dir.path().join("fig4_spectrum.csv")).unwrap(),
        &fs::read_to_string(dir.path().join("fig4_spectrum.json")).unwrap(),
    )
    .unwrap();
    assert_eq!((spec.n, spec.p(), spec.scaled), (60, 3, true));
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fig4_hist.json")).unwrap()).unwrap();
    let width = meta["bin_width"].as_f64().unwrap();
    let rows: Vec<f64> = fs::read_to_string(dir.path().join("fig4_hist.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.parse().unwrap())
        .collect();
    assert_eq!(rows.len() as u64, meta["bins"].as_u64().unwrap());
    let mass: f64 = rows.iter().map(|h| h * width).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn repeated_runs_are_bit_identical() {
    for args in [SAMPLE, ROOTS, DENSITY, ORACLE, COMPARE, GAP] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let one = bin().args(COMPARE).env("BLOCKSPEC_THREADS", "1").output().unwrap();
    let four = bin().args(COMPARE).env("BLOCKSPEC_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = bin().args(COMPARE).env("BLOCKSPEC_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["sample", "--n", "10", "--p", "1", "--gamma", "1"]), Some(0));
    assert_eq!(code(&["sample", "--n", "10", "--p", "1", "--gamma", "1", "--bogus"]), Some(2));
    assert_eq!(code(&["sample", "--n", "10", "--p", "2", "--gamma", "1"]), Some(2));
    assert_eq!(code(&["sample", "--n", "9", "--p", "2", "--gamma", "1,1"]), Some(2));
    assert_eq!(code(&["sample", "--n", "10", "--p", "1", "--gamma", "-1"]), Some(2));
    assert_eq!(code(&["density", "--p", "2", "--gamma", "8,2", "--grid", "100"]), Some(2));
    assert_eq!(code(&["figure", "--name", "fig9"]), Some(2));
    assert_eq!(code(&["oracle", "--p", "3", "--gamma", "1,1,1"]), Some(2));
    assert_eq!(code(&["density", "--p", "2", "--gamma", "2,8", "--grid", "100", "--quad-tol", "1e-300"]), Some(3));
    assert_eq!(code(&["sample", "--n", "10", "--p", "1", "--gamma", "1", "-o", "/nonexistent/dir/x.csv"]), Some(1));
}

#[test]
fn diagnostics_are_one_line() {
    let res = run(&["sample", "--n", "9", "--p", "2", "--gamma", "1,1"]);
    let err = String::from_utf8(res.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("multiple"));
}
