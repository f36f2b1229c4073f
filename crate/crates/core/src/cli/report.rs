use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ReportError;
use crate::eval::FeasibilityReport;
use crate::model::{Position3, Scenario};
use crate::sca::IterationRecord;
use crate::schedule::{RunStatus, SlotSchedule, Solution};

use super::scenario_file::nats_to_bits;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SCHEDULE_CSV: &str = "schedule.csv";
pub const ITERATIONS_CSV: &str = "iterations.csv";
pub const SUMMARY_JSON: &str = "summary.json";

const TRAJECTORY_HEADER: [&str; 5] = ["n", "t_s", "x_m", "y_m", "z_m"];
const SCHEDULE_HEADER: [&str; 11] =
    ["n", "b1_hz", "b2_hz", "rho", "p_a_w", "p_b_w", "p_e_w", "r_ub", "r_ue", "r_b", "r_e"];
const ITERATIONS_HEADER: [&str; 10] = [
    "iter",
    "phase",
    "surrogate_objective",
    "exact_objective",
    "max_overlap_hz2",
    "max_move_m",
    "qos_slack",
    "rel_change",
    "status",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub strategy: String,
    pub status: String,
    pub iterations: usize,
    pub secrecy_total_nat: f64,
    pub secrecy_total_bit: f64,
    pub eve_total_nat: f64,
    pub eve_total_bit: f64,
    pub eve_qos_target_nat: f64,
    pub eve_qos_target_bit: f64,
    pub surrogate_objective_nat: f64,
    pub feasible: bool,
    pub degraded: Option<String>,
    pub feasibility: FeasibilityReport,
}

fn num(v: f64) -> String {
    // shortest round-trip decimal, never locale-formatted
    format!("{v}")
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Write { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> ReportError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    ReportError::Write { path: path.to_path_buf(), source }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(write_err(path))
}

/// Write the trajectory, schedule, iteration log and summary of one run.
///
/// With `deterministic`, wall times are written as `0` so identical runs
/// give identical bytes.
pub fn emit_report(
    sol: &Solution,
    log: &[IterationRecord],
    s: &Scenario,
    report: &FeasibilityReport,
    strategy: &str,
    dir: &Path,
    deterministic: bool,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(write_err(dir))?;

    let traj_path = dir.join(TRAJECTORY_CSV);
    let mut rows = vec![vec!["0".into(), num(0.0), num(s.uav_start.x), num(s.uav_start.y), num(s.uav_start.z)]];
    for (i, sl) in sol.slots.iter().enumerate() {
        let n = i + 1;
        rows.push(vec![
            n.to_string(),
            num(n as f64 * s.slot_duration_s),
            num(sl.q.x),
            num(sl.q.y),
            num(sl.q.z),
        ]);
    }
    write_csv(&traj_path, &TRAJECTORY_HEADER, &rows)?;

    let sched_path = dir.join(SCHEDULE_CSV);
    let rows: Vec<Vec<String>> = sol
        .slots
        .iter()
        .enumerate()
        .map(|(i, sl)| {
            vec![
                (i + 1).to_string(),
                num(sl.b1),
                num(sl.b2),
                u8::from(sl.rho).to_string(),
                num(sl.p_a),
                num(sl.p_b),
                num(sl.p_e),
                num(sl.r_ub),
                num(sl.r_ue),
                num(sl.r_b),
                num(sl.r_e),
            ]
        })
        .collect();
    write_csv(&sched_path, &SCHEDULE_HEADER, &rows)?;

    let iter_path = dir.join(ITERATIONS_CSV);
    let rows: Vec<Vec<String>> = log
        .iter()
        .map(|r| {
            vec![
                r.iter.to_string(),
                r.phase.as_str().into(),
                num(r.surrogate_objective),
                num(r.exact_objective),
                num(r.max_overlap),
                num(r.max_move_m),
                num(r.qos_slack),
                r.rel_change.map(num).unwrap_or_default(),
                r.status.as_str().into(),
                num(if deterministic { 0.0 } else { r.wall_time_s }),
            ]
        })
        .collect();
    write_csv(&iter_path, &ITERATIONS_HEADER, &rows)?;

    let summary_path = dir.join(SUMMARY_JSON);
    let summary = Summary {
        strategy: strategy.into(),
        status: sol.status.as_str().into(),
        iterations: sol.iterations,
        secrecy_total_nat: sol.secrecy_total,
        secrecy_total_bit: nats_to_bits(sol.secrecy_total),
        eve_total_nat: sol.eve_total,
        eve_total_bit: nats_to_bits(sol.eve_total),
        eve_qos_target_nat: s.eve_qos_target,
        eve_qos_target_bit: nats_to_bits(s.eve_qos_target),
        surrogate_objective_nat: sol.surrogate_objective,
        feasible: report.pass,
        degraded: sol.degraded.clone(),
        feasibility: report.clone(),
    };
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| ReportError::Write {
        path: summary_path.clone(),
        source: std::io::Error::other(e),
    })?;
    text.push('\n');
    fs::write(&summary_path, text).map_err(write_err(&summary_path))?;

    Ok(vec![traj_path, sched_path, iter_path, summary_path])
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, ReportError> {
    let bad = |reason: String| ReportError::Read { path: path.to_path_buf(), reason };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let got = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(bad(format!("unexpected header {:?}", got)));
    }
    r.records().map(|x| x.map_err(|e| bad(e.to_string()))).collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T, ReportError> {
    rec.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| ReportError::Read {
        path: path.to_path_buf(),
        reason: format!("bad field {i} in {:?}", rec),
    })
}

/// Rebuild a schedule from `trajectory.csv` and `schedule.csv`. Totals and
/// status are left at neutral values; recompute them from the slots.
pub fn read_schedule(dir: &Path) -> Result<Solution, ReportError> {
    let tp = dir.join(TRAJECTORY_CSV);
    let sp = dir.join(SCHEDULE_CSV);
    let traj = read_rows(&tp, &TRAJECTORY_HEADER)?;
    let sched = read_rows(&sp, &SCHEDULE_HEADER)?;
    if traj.len() != sched.len() + 1 {
        return Err(ReportError::Read {
            path: tp,
            reason: format!("{} trajectory rows for {} slots", traj.len(), sched.len()),
        });
    }
    let mut slots = Vec::with_capacity(sched.len());
    for (t, r) in traj[1..].iter().zip(&sched) {
        let q = Position3::new(field(&tp, t, 2)?, field(&tp, t, 3)?, field(&tp, t, 4)?);
        let rho: u8 = field(&sp, r, 3)?;
        slots.push(SlotSchedule {
            q,
            b1: field(&sp, r, 1)?,
            b2: field(&sp, r, 2)?,
            rho: rho == 1,
            p_a: field(&sp, r, 4)?,
            p_b: field(&sp, r, 5)?,
            p_e: field(&sp, r, 6)?,
            r_ub: field(&sp, r, 7)?,
            r_ue: field(&sp, r, 8)?,
            r_b: field(&sp, r, 9)?,
            r_e: field(&sp, r, 10)?,
        });
    }
    Ok(Solution {
        slots,
        secrecy_total: 0.0,
        eve_total: 0.0,
        surrogate_objective: f64::NAN,
        status: RunStatus::Converged,
        degraded: None,
        iterations: 0,
    })
}

pub fn read_summary(dir: &Path) -> Result<Summary, ReportError> {
    let p = dir.join(SUMMARY_JSON);
    let text = fs::read_to_string(&p).map_err(|e| ReportError::Read { path: p.clone(), reason: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| ReportError::Read { path: p, reason: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{feasibility_report, REPORT_TOL};
    use crate::testutil::{default_scenario, zero_solution};

    #[test]
    fn round_trip_of_awkward_values() {
        let s = default_scenario();
        let mut sol = zero_solution(&s);
        sol.slots[3].b1 = 1e7 / 3.0;
        sol.slots[3].b2 = 1e7 - 1e7 / 3.0;
        sol.slots[3].p_a = 0.1 + 0.2;
        sol.slots[3].r_ub = 1.0e-300;
        sol.slots[3].q.x = -1234.567890123456789;
        sol.secrecy_total = 12345.678;
        let report = feasibility_report(&sol, &s, REPORT_TOL);
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&sol, &[], &s, &report, "joint", dir.path(), true).unwrap();
        assert_eq!(files.len(), 4);
        let back = read_schedule(dir.path()).unwrap();
        assert_eq!(back.slots, sol.slots);
        assert_eq!(feasibility_report(&back, &s, REPORT_TOL), report);
        let traj = fs::read_to_string(dir.path().join(TRAJECTORY_CSV)).unwrap();
        assert_eq!(traj.lines().count(), 1 + 46);
        let sum = read_summary(dir.path()).unwrap();
        assert!((sum.secrecy_total_bit * std::f64::consts::LN_2 / sum.secrecy_total_nat - 1.0).abs() < 1e-12);
        assert_eq!(sum.feasibility, report);
    }

    #[test]
    fn unwritable_directory() {
        let s = default_scenario();
        let sol = zero_solution(&s);
        let report = feasibility_report(&sol, &s, REPORT_TOL);
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_report(&sol, &[], &s, &report, "joint", &blocker.join("out"), true).unwrap_err();
        assert!(err.to_string().contains("file"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn numbers_round_trip_bit_for_bit(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
                prop_assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
            }
        }
    }
}
