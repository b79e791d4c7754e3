//! The `savwave` binary end to end.

use std::process::{Command, Output};

fn savwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_savwave")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn converge_writes_table() {
    let o = savwave(&["converge", "--problem", "klein-gordon-2d", "--m", "4,8", "--n-rule", "eq-m", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,n,h,tau,l2_error,l2_order,h1_superclose,h1_order");
    assert_eq!(lines.len(), 3);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 8);
    assert_eq!(first[0], "4");
    assert_eq!(first[5], "");
    assert_eq!(first[7], "");
    let second: Vec<&str> = lines[2].split(',').collect();
    let order: f64 = second[5].parse().unwrap();
    assert!(order > 1.5);
}

#[test]
fn energy_of_one_step_has_two_rows() {
    let o = savwave(&["energy", "--problem", "klein-gordon-2d", "--m", "4", "--n", "1", "--t", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "step,time,energy");
    assert!(lines[1].starts_with("0,0.00000000000e0,"));
    assert!(lines[2].starts_with("1,5.00000000000e-1,"));
}

#[test]
fn energy_both_schemes() {
    let o = savwave(&["energy", "--problem", "klein-gordon-2d", "--m", "4", "--n", "3", "--t", "3", "--scheme", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("step,time,energy_sav,energy_lcn\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn run_summary_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let dump = dir.path().join("u.csv");
    let o = savwave(&[
        "run",
        "--problem",
        "klein-gordon-2d",
        "--m",
        "3",
        "--n",
        "2",
        "--t",
        "1",
        "--scheme",
        "lcn",
        "--out",
        out.to_str().unwrap(),
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "problem,scheme,m,n,t_final,energy,l2_error,h1_superclose");
    assert!(lines[1].starts_with("klein-gordon-2d,lcn,3,2,1.00000000000e0,"));
    let dumped = std::fs::read_to_string(&dump).unwrap();
    assert!(dumped.starts_with("x,y,u\n"));
    assert_eq!(dumped.lines().count(), 1 + 16);
}

#[test]
fn output_is_deterministic() {
    let args = ["converge", "--problem", "sine-gordon-3d", "--m", "2,3", "--n", "4", "--t", "0.5"];
    let a = savwave(&args);
    let b = savwave(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["converge", "--problem", "nope", "--m", "4", "--n", "4", "--t", "1"][..],
        &["converge", "--problem", "klein-gordon-2d", "--m", "8,4", "--n", "4", "--t", "1"],
        &["run", "--problem", "klein-gordon-2d", "--m", "4", "--n", "4", "--n-rule", "eq-m", "--t", "1"],
        &["run", "--problem", "klein-gordon-2d", "--m", "4", "--n", "4", "--t", "1", "--degree", "3"],
        &["run", "--problem", "klein-gordon-2d", "--m", "4", "--n", "0", "--t", "1"],
        &["run", "--problem", "klein-gordon-2d", "--m", "4", "--n", "4", "--t", "1", "--scheme", "both"],
        &["frobnicate"],
    ] {
        let o = savwave(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_failure_exits_1() {
    let o = savwave(&["run", "--problem", "klein-gordon-2d", "--m", "4", "--n", "2", "--t", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("savwave: "));
}

#[test]
fn help_exits_0() {
    let o = savwave(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("converge"));
}
