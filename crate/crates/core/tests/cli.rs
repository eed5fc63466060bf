use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use msvi::bench::{strip_column, SUMMARY_HEADER, TRACE_HEADER};
use msvi::{gen_random_affine, load_problem};

fn msvi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msvi")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_a_loadable_problem() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    let out = msvi(&["gen", "--m", "6", "--n0", "2", "--n1", "3", "--seed", "7", "--out", path_str(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(load_problem(&file).unwrap(), gen_random_affine(6, 2, 3, 7).unwrap());

    let reference = dir.path().join("r.json");
    let out = msvi(&["gen", "--family", "random-walk", "--stages", "2", "--ell", "1", "--reference-only", "--out", path_str(&reference)]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&reference).unwrap().contains("random_walk"));
    assert!(load_problem(&reference).unwrap().known_solution.is_some());
}

#[test]
fn solve_from_file_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.json");
    assert!(msvi(&["gen", "--m", "4", "--n0", "2", "--n1", "2", "--out", path_str(&file)]).status.success());
    let out_dir = dir.path().join("run");
    let out = msvi(&["solve", "--problem", path_str(&file), "--algo", "pha", "--eps", "1e-6", "--out", path_str(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with(SUMMARY_HEADER));
    assert!(stdout.contains("\npha,4,4,"));
    let trace = fs::read_to_string(out_dir.join("trace_pha_000.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER);
}

#[test]
fn bench_summary_matches_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = msvi(&[
        "bench", "--m", "5", "--n0", "2", "--n1", "2", "--trials", "3", "--eps", "1e-4", "--assert-theory", "--out",
        path_str(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_HEADER);
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let lengths: Vec<usize> = (0..3)
            .map(|t| {
                let trace = fs::read_to_string(dir.path().join(format!("trace_{}_{t:03}.csv", cols[0]))).unwrap();
                trace.lines().count() - 1
            })
            .collect();
        let mean = lengths.iter().sum::<usize>() as f64 / 3.0;
        let avg_iter: f64 = cols[4].parse().unwrap();
        assert!((avg_iter - mean).abs() < 1e-9, "{line}");
    }
}

#[test]
fn repeated_runs_match_except_clock() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = msvi(&["solve", "--seed", "3", "--m", "5", "--n0", "2", "--n1", "2", "--out", path_str(d.path())]);
        assert!(out.status.success());
    }
    let read = |i: usize| fs::read_to_string(dirs[i].path().join("trace_pc_admm_000.csv")).unwrap();
    assert_eq!(strip_column(&read(0), "elapsed_ms"), strip_column(&read(1), "elapsed_ms"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(msvi(&["solve", "--problem", path_str(&missing)]).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"generator": {"family": "lottery"}}"#).unwrap();
    let out = msvi(&["solve", "--problem", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(msvi(&["bench", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(msvi(&["solve", "--algo", "simplex"]).status.code(), Some(2));

    let out = msvi(&["solve", "--m", "5", "--n0", "2", "--n1", "2", "--max-iter", "2", "--eps", "1e-9"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}
