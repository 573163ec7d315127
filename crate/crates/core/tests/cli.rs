use std::fs;
use std::path::PathBuf;
use std::process::Command;

use collective_dressing::cli::run;
use collective_dressing::sweep::{read_series_csv, StaircaseSeries};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collective-dressing"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn run_in_process(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("collective-dressing").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn closed_autler_townes() {
    let out = run_ok(&["closed", "--atoms", "1", "--photons", "4", "--coupling", "1", "--corr", "0.9"]);
    assert_eq!(column(&out, "e_plus"), vec![2.0]);
    assert_eq!(column(&out, "e_minus"), vec![-2.0]);
    // N=1 has no N^2 asymptote; the field stays empty
    assert_eq!(out.lines().nth(1).unwrap().split(',').nth(5), Some(""));
}

#[test]
fn closed_json_has_asymptotes() {
    let out = run_ok(&["closed", "-N", "100", "-n", "1", "-g", "1", "-c", "0.1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["asym_upper"], 1000.0);
    assert_eq!(v["asym_lower"], -10.0);
    assert_eq!(v["asym_step_upper"], 20.0);
}

#[test]
fn eig_symmetric_fixture() {
    let out = run_ok(&["eig", "--atoms", "2", "--block", "2", "--coupling", "1", "--corr", "0.3", "--space", "symmetric"]);
    let ev = column(&out, "eigenvalue");
    // roots of lambda (lambda^2 - 0.3 lambda - 6)
    let d = (0.09f64 + 24.0).sqrt();
    let expected = [(0.3 - d) / 2.0, 0.0, (0.3 + d) / 2.0];
    for (a, b) in ev.iter().zip(expected) {
        assert!((a - b).abs() < 2e-5);
    }
    for (a, b) in ev.iter().zip([-2.30408, 0.0, 2.60408]) {
        assert!((a - b).abs() < 2e-5);
    }
}

#[test]
fn eig_vectors_and_json() {
    let out = run_ok(&["eig", "-N", "3", "-M", "2", "--space", "full", "-c", "0.4", "--vectors"]);
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("index,eigenvalue,residual,c0,"));
    assert!(column(&out, "residual").iter().all(|&r| r < 1e-12));
    let out = run_ok(&["eig", "-N", "3", "-M", "2", "--space", "full", "-c", "0.4", "--vectors", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dim"], 7);
    assert_eq!(v["basis"][0], "|ggg;2>");
    assert_eq!(v["eigenvectors"].as_array().unwrap().len(), 7);
}

#[test]
fn dump_two_atom_block() {
    let out = run_ok(&["dump", "--atoms", "2", "--block", "1", "--space", "full", "--coupling", "1", "--corr", "0.5"]);
    assert_eq!(out, "row,col,value\n0,1,1\n0,2,1\n1,0,1\n2,0,1\n");
    let out = run_ok(&["dump", "-N", "2", "-M", "2", "-c", "0.3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["space"], "symmetric");
    assert_eq!(v["entries"][2], serde_json::json!([1, 1, 0.3]));
}

#[test]
fn fig1_staircase() {
    let out = run_ok(&["fig", "1"]);
    let plus = column(&out, "e_plus");
    assert_eq!(plus, (1..=40).map(|n| n as f64).collect::<Vec<_>>());
    let minus = column(&out, "e_minus");
    assert!(plus.iter().zip(&minus).all(|(a, b)| a + b == 0.0));
}

#[test]
fn figures_are_deterministic_across_runs_and_threads() {
    for fig in ["1", "2", "3", "4", "5", "6"] {
        for format in ["csv", "json"] {
            let a = run_ok(&["fig", fig, "--format", format]);
            let b = run_ok(&["fig", fig, "--format", format]);
            let c = run_ok(&["fig", fig, "--format", format, "--jobs", "4"]);
            assert_eq!(a, b, "fig {fig} {format}");
            assert_eq!(a, c, "fig {fig} {format} parallel");
        }
        let ed = run_ok(&["fig", fig, "--method", "symmetric", "--n-to", "12"]);
        let ed_par = run_ok(&["fig", fig, "--method", "symmetric", "--n-to", "12", "--jobs", "3"]);
        assert_eq!(ed, ed_par);
    }
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let csv = run_ok(&["sweep", "-n", "2", "-c", "-0.37", "--n-from", "3", "--n-to", "30"]);
    let json = run_ok(&["sweep", "-n", "2", "-c", "-0.37", "--n-from", "3", "--n-to", "30", "--format", "json"]);
    let from_csv = read_series_csv(csv.as_bytes()).unwrap();
    let from_json: StaircaseSeries = serde_json::from_str(&json).unwrap();
    assert_eq!(from_csv, from_json.points);

    // multi-series figure: CSV blocks separated by blank lines, JSON array
    let csv = run_ok(&["fig", "6"]);
    let json = run_ok(&["fig", "6", "--format", "json"]);
    let blocks: Vec<_> = csv.split("\n\n").map(|b| read_series_csv(b.as_bytes()).unwrap()).collect();
    let series: Vec<StaircaseSeries> = serde_json::from_str(&json).unwrap();
    assert_eq!(blocks.len(), 3);
    for (b, s) in blocks.iter().zip(&series) {
        assert_eq!(b, &s.points);
    }
}

#[test]
fn fig_out_writes_one_file_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("fig3.csv");
    let out = bin().args(["fig", "3", "--quiet", "--out"]).arg(&base).output().unwrap();
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
    for label in ["pos", "zero"] {
        let path: PathBuf = dir.path().join(format!("fig3.{label}.csv"));
        let points = read_series_csv(fs::File::open(&path).unwrap()).unwrap();
        assert_eq!(points.len(), 40);
    }
    let single = dir.path().join("fig2.csv");
    assert!(bin().args(["fig", "2", "--out"]).arg(&single).status().unwrap().success());
    assert_eq!(read_series_csv(fs::File::open(&single).unwrap()).unwrap().len(), 40);
}

#[test]
fn verify_report() {
    let out = run_ok(&["verify", "--photons", "1", "--coupling", "1", "--corr", "0.1", "--n-from", "1", "--n-to", "10"]);
    assert_eq!(out.lines().count(), 11);
    assert_eq!(column(&out, "abs_gap_plus")[0], 0.0);
    assert_eq!(column(&out, "abs_gap_minus")[0], 0.0);
    assert!(column(&out, "abs_gap_plus").iter().all(|g| *g >= 0.0));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["closed", "--atoms", "1"][..],
        &["eig", "--atoms", "2", "--block", "1", "--space", "diagonal"],
        &["fig", "7"],
        &["sweep", "--method", "magic"],
        &["sweep", "--n-from", "0"],
        &["frobnicate"],
    ] {
        let (code, out, err) = run_in_process(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(out.is_empty());
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn io_failure_names_path() {
    let (code, _, err) = run_in_process(&["fig", "1", "--out", "/nonexistent-dir/fig1.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("/nonexistent-dir/fig1.csv"), "{err}");
}

#[test]
fn binary_exit_codes() {
    assert_eq!(bin().args(["closed", "--nope"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["closed", "-N", "2", "-n", "1"]).output().unwrap().status.code(), Some(0));
}

fn golden(name: &str, args: &[&str]) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let (code, out, _) = run_in_process(args);
    assert_eq!(code, 0);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &out).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(out, expected, "help text for {args:?} drifted; rerun with UPDATE_GOLDEN=1 if intended");
}

#[test]
fn help_text_is_pinned() {
    golden("help.txt", &["--help"]);
    for sub in ["eig", "closed", "sweep", "fig", "verify", "dump"] {
        golden(&format!("help_{sub}.txt"), &[sub, "--help"]);
    }
}

#[test]
fn help_lists_every_flag() {
    let (_, top, _) = run_in_process(&["--help"]);
    for flag in ["--out", "--format", "--quiet", "--jobs"] {
        assert!(top.contains(flag), "{flag}");
    }
    let (_, eig, _) = run_in_process(&["eig", "--help"]);
    for flag in ["--atoms", "-N", "--block", "--coupling", "-g", "--corr", "-c", "--space", "--vectors", "--pair-convention"] {
        assert!(eig.contains(flag), "{flag}");
    }
    let (_, sweep, _) = run_in_process(&["sweep", "--help"]);
    for flag in ["--photons", "-n", "--n-from", "--n-to", "--method"] {
        assert!(sweep.contains(flag), "{flag}");
    }
}
