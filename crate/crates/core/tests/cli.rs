use std::path::Path;
use std::process::Command;

use uav_secrecy::cli::{parse_scenario, read_schedule, read_summary, DEFAULT_MISSION_TOML};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uav-secrecy"))
}

fn optimize(out: &Path) -> std::process::Output {
    bin().args(["optimize", "--scenario", "default_mission", "--out"]).arg(out).output().unwrap()
}

#[test]
fn validate_bundled_scenario() {
    let out = bin().args(["validate", "--scenario", "default_mission"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 violations"));
}

#[test]
fn usage_errors() {
    let out = bin().args(["plot", "--scenario", "default_mission"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["sweep", "--scenario", "default_mission"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["validate", "--scenario", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn scenario_file_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("slow.toml");
    std::fs::write(&p, DEFAULT_MISSION_TOML.replace("max_speed_mps = 20.0", "max_speed_mps = 5.0")).unwrap();
    let out = bin().arg("validate").arg("--scenario").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 violations"));
}

#[test]
fn optimize_artifacts() {
    let s = parse_scenario(DEFAULT_MISSION_TOML).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = optimize(dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let rows: Vec<Vec<f64>> = traj
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 46);
    assert_eq!(&rows[0][2..], &[s.uav_start.x, s.uav_start.y, s.uav_start.z]);
    assert_eq!(&rows[45][2..], &[s.uav_end.x, s.uav_end.y, s.uav_end.z]);

    let sched = read_schedule(dir.path()).unwrap();
    assert!(sched.slots.iter().all(|sl| sl.b1 + sl.b2 == s.bandwidth_hz));

    let sum = read_summary(dir.path()).unwrap();
    let ln2 = std::f64::consts::LN_2;
    assert!((sum.secrecy_total_bit * ln2 - sum.secrecy_total_nat).abs() <= 1e-12 * sum.secrecy_total_nat);
    assert!((sum.eve_total_bit * ln2 - sum.eve_total_nat).abs() <= 1e-12 * sum.eve_total_nat);
    assert!(sum.feasible);

    let jsonl = std::fs::read_to_string(dir.path().join("iterations.jsonl")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("iterations.csv")).unwrap();
    assert_eq!(jsonl.lines().count() + 1, csv.lines().count());
}

#[test]
fn unreachable_target_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["optimize", "--scenario", "default_mission", "--re", "1e6", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn baseline_writes_one_directory_per_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["baseline", "--scenario", "default_mission", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for name in ["fixed_bandwidth", "fixed_timeslot"] {
        assert_eq!(read_summary(&dir.path().join(name)).unwrap().strategy, name);
    }
}
