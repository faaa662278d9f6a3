use std::path::PathBuf;
use std::process::{Command, Output};

use singescape::{parse_trajectory_csv, AnalysisReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singescape"))
}

fn robot() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/benchmark_robot.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SINGULAR_Q: &str = "0,0,deg:90,0,deg:90,0";

#[test]
fn analyze_benchmark_singularity() {
    let robot = robot();
    let o = run(&["analyze", "--robot", robot.to_str().unwrap(), "--q", SINGULAR_Q]);
    assert_eq!(o.status.code(), Some(0));
    let report = AnalysisReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.classification.unwrap().as_str(), "EscapeOppositeUm");
    assert!((report.a.as_ref().unwrap()[0][0] + 2.0).abs() < 1e-6);
    assert_eq!(report.h, Some(-2.0));
    assert_eq!(report.rank, 5);
    assert!(report.is_consistent());
}

#[test]
fn analyze_report_reparses_identically() {
    let robot = robot();
    for q in [SINGULAR_Q, "0.1,0.2,0.3,0.4,0.5,0.6", "0,0,deg:-90,0,1,0"] {
        let o = run(&["analyze", "--robot", robot.to_str().unwrap(), "--q", q]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let report = AnalysisReport::from_json(&text).unwrap();
        assert_eq!(report.to_json(), text);
    }
}

#[test]
fn analyze_numeric_jacobian_has_no_h() {
    let robot = robot();
    let o = run(&[
        "analyze",
        "--robot",
        robot.to_str().unwrap(),
        "--q",
        SINGULAR_Q,
        "--jacobian",
        "numeric",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = AnalysisReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.h, None);
    assert_eq!(report.classification.unwrap().as_str(), "EscapeOppositeUm");
}

#[test]
fn analyze_exit_codes() {
    let robot = robot();
    let robot = robot.to_str().unwrap();
    let missing = run(&["analyze", "--robot", "/nonexistent/robot.json", "--q", "0"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(missing.stdout.is_empty());

    let full_rank = run(&["analyze", "--robot", robot, "--q", "0,0,0,0,1,0", "--require-singular"]);
    assert_eq!(full_rank.status.code(), Some(2));
    assert!(full_rank.stdout.is_empty());

    let plain = run(&["analyze", "--robot", robot, "--q", "0,0,0,0,1,0"]);
    assert_eq!(plain.status.code(), Some(0));
    assert!(AnalysisReport::from_json(&stdout(&plain))
        .unwrap()
        .classification
        .is_none());

    let short = run(&["analyze", "--robot", robot, "--q", "0,0"]);
    assert_eq!(short.status.code(), Some(1));
    let bad_flag = run(&["analyze", "--robot", robot]);
    assert_eq!(bad_flag.status.code(), Some(1));
    let bad_pin = run(&["analyze", "--robot", robot, "--q", SINGULAR_Q, "--pin-qs", "9"]);
    assert_eq!(bad_pin.status.code(), Some(1));
}

#[test]
fn sweep_examples() {
    let o = run(&["sweep", "--a2", "1", "--d4", "1", "--epsilon", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains("NoFeasiblePath"));

    let o = run(&["sweep", "--a2", "0.5", "--d4", "1", "--epsilon", "-1"]);
    let text = stdout(&o);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[4].parse::<f64>().unwrap(), 1.0);
    assert_eq!(fields[5], "EscapeAlongUm");

    let o = run(&["sweep", "--a2", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "a2,d4,epsilon,A,h,class,A_pipeline\n");

    assert_eq!(run(&["sweep", "--a2", "0:1"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--a2", "-1"]).status.code(), Some(1));
}

#[test]
fn sweep_is_ordered_and_deterministic() {
    let args = ["sweep", "--a2", "0.5:2:7", "--d4", "0.5:2:7"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 7 * 7 * 2);
    let first: Vec<&str> = a.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((first[0], first[2]), ("5.0000000000000000e-1", "-1"));
}

#[test]
fn simulate_escape_moves_opposite_um() {
    let robot = robot();
    let o = run(&[
        "simulate",
        "--robot",
        robot.to_str().unwrap(),
        "--q0",
        SINGULAR_Q,
        "--escape",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_trajectory_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().filter(|r| r.t > 0.0).all(|r| r.ddot < 0.0));
}

#[test]
fn simulate_zero_rate_is_constant() {
    let robot = robot();
    let o = run(&[
        "simulate",
        "--robot",
        robot.to_str().unwrap(),
        "--q0",
        "0.1,0.2,0.3,0.4,0.5,0.6",
        "--qdot",
        "0,0,0,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_trajectory_csv(&stdout(&o)).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.q == rows[0].q && r.ddot == 0.0 && r.sigma_min == rows[0].sigma_min));
}

#[test]
fn simulate_escape_needs_singular_start() {
    let robot = robot();
    let o = run(&[
        "simulate",
        "--robot",
        robot.to_str().unwrap(),
        "--q0",
        "0,0,0,0,1,0",
        "--escape",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn simulate_degenerate_branch_warns() {
    let robot = robot();
    let o = run(&[
        "simulate",
        "--robot",
        robot.to_str().unwrap(),
        "--q0",
        "0,0,deg:-90,0,deg:90,0",
        "--escape",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no feasible escape path"));
    let rows = parse_trajectory_csv(&stdout(&o)).unwrap();
    assert!(rows.iter().all(|r| r.qdot.iter().all(|&v| v == 0.0)));
}

#[test]
fn verify_default_grid_and_fault_injection() {
    let ok = run(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert!(text.contains("grid points: 18"));
    let line = text
        .lines()
        .find(|l| l.starts_with("max relative |A_num - A_cf|"))
        .unwrap();
    let value: f64 = line
        .split(": ")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(value < 1e-6);

    let bad = run(&["verify", "--perturb-H"]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(bad.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("FAIL a2 ="));

    let single = run(&["verify", "--a2", "1", "--d4", "2", "--epsilon", "1"]);
    assert_eq!(single.status.code(), Some(0));
    assert!(stdout(&single).contains("grid points: 1"));
}

#[test]
fn invalid_robot_file_reports_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name": "bad", "task_dim": 3, "joints": [{"kind": "revolute", "alpha_deg": "NaN", "a": 1, "d": 0}]}"#,
    )
    .unwrap();
    let o = run(&["analyze", "--robot", path.to_str().unwrap(), "--q", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-finite field"));
}
