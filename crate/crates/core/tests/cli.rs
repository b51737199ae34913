use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use crs_eigen::bench::{replay, RunRecord};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crs-eigen")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of the CSV block printed on stdout, without the timing column.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with("lambda["));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let time = header.iter().position(|h| *h == "time_s").unwrap();
    lines
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != time)
                .map(|(_, f)| f.to_string())
                .collect()
        })
        .collect()
}

fn header_of(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn run_lap1d_converges() {
    let o = run(&["run", "--problem", "lap1d:100", "--solver", "crs", "--nev", "5", "--m", "20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("lambda[")).count(), 5);
    let r = rows(&text);
    assert_eq!(r[0][0], "crs");
    assert_eq!(r[0].last().unwrap(), "true");
}

#[test]
fn run_beam_reports_iterations() {
    let o = run(&["run", "--problem", "beam:40x8", "--solver", "cd", "--nev", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert!(r[0][3].parse::<usize>().unwrap() > 0);
}

#[test]
fn bad_input_exits_with_error() {
    assert_eq!(run(&["run", "--problem", "lap1d:0"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--problem", "cube:3"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--problem", "lap1d:20", "--nev", "0"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--problem", "lap1d:20"]).status.code(), Some(1));
}

#[test]
fn iteration_cap_exits_partial() {
    let o = run(&["run", "--problem", "beam:10x3", "--solver", "cd", "--nev", "3", "--it-max", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_same_solver_twice_is_reproducible() {
    let o = run(&["compare", "--problem", "beam:12x3", "--solver", "crs,crs", "--nev", "3", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0], r[1]);
}

#[test]
fn compare_verifies_against_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["compare", "--problem", "lap1d:200", "--solver", "cd,crs,oracle", "--nev", "4", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| row.last().unwrap() == "true"), "{r:?}");
    assert_eq!(header_of(&dir.path().join("compare.csv")), "solver,problem,nev,it,mv,time_s,converged,verified");
    assert_eq!(header_of(&dir.path().join("summary.csv")), "solver,problem,nev,it,mv,time_s,converged");
    for s in ["cd", "crs"] {
        assert_eq!(header_of(&dir.path().join(format!("history_{s}.csv"))), "eigenpair_index,outer_iter,rel_residual");
    }
}

#[test]
fn single_cap_sweep_matches_run() {
    let args = ["--problem", "beam:12x4", "--nev", "2", "--seed", "1"];
    let sweep = run(&[&["sweep", "--inner-iters", "25"], &args[..]].concat());
    let single = run(&[&["run", "--solver", "crs", "--inner-iters", "25"], &args[..]].concat());
    let (s, r) = (rows(&stdout(&sweep)), rows(&stdout(&single)));
    assert_eq!(s.len(), 1);
    // sweep: inner_iters,it,mv,converged; run: solver,problem,nev,it,mv,converged
    assert_eq!(s[0][1..], r[0][3..]);

    let many = run(&[&["sweep", "--inner-iters", "5,10,25"], &args[..]].concat());
    let m = rows(&stdout(&many));
    assert_eq!(m.iter().map(|row| row[0].as_str()).collect::<Vec<_>>(), ["5", "10", "25"]);
}

#[test]
fn run_writes_files_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["run", "--problem", "lap1d:80", "--solver", "cd", "--nev", "3", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(header_of(&dir.path().join("summary.csv")), "solver,problem,nev,it,mv,time_s,converged");
    let hist = fs::read_to_string(dir.path().join("history_cd.csv")).unwrap();
    let record: RunRecord = serde_json::from_str(&fs::read_to_string(dir.path().join("run_cd.json")).unwrap()).unwrap();
    assert_eq!(hist.lines().count(), record.it_total + 1);
    let again = replay(&record).unwrap().record;
    assert_eq!(again.values, record.values);
    assert_eq!(again.it_total, record.it_total);
    assert_eq!(again.mv_total, record.mv_total);
}
