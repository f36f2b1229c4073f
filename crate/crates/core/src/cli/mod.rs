//! Batch front end: scenario files, command dispatch and artifacts.

mod report;
mod scenario_file;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use report::{
    emit_report, read_schedule, read_summary, Summary, ITERATIONS_CSV, SCHEDULE_CSV, SUMMARY_JSON, TRAJECTORY_CSV,
};
pub use scenario_file::{
    db_to_linear, dbm_to_watts, load_scenario, mbps_to_nats, nats_to_bits, parse_scenario, read_scenario,
    BUILTIN_SCENARIO, DEFAULT_MISSION_TOML,
};

use crate::error::ScaError;
use crate::eval::{feasibility_report, sweep_uncertainty, write_rows_csv, REPORT_TOL};
use crate::model::{validate_scenario, Scenario};
use crate::sca::{run_strategy, IterationRecord, SolverOptions};
use crate::transform::Strategy;

pub const COMPARISON_CSV: &str = "comparison.csv";
pub const ITERATIONS_JSONL: &str = "iterations.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Optimize,
    Baseline,
    Sweep,
    Validate,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        match s {
            "optimize" => Some(Command::Optimize),
            "baseline" => Some(Command::Baseline),
            "sweep" => Some(Command::Sweep),
            "validate" => Some(Command::Validate),
            _ => None,
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INVALID_SCENARIO: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
    pub const SOLVER_FAILURE: i32 = 5;
    /// Artifacts were written but the schedule failed its audit.
    pub const DEGRADED: i32 = 6;
    pub const IO: i32 = 7;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Path to a scenario file or [`BUILTIN_SCENARIO`].
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub strategy: Option<Strategy>,
    /// Eve uncertainty radii for `sweep`, km.
    pub de_grid_km: Option<Vec<f64>>,
    /// Override of the Eve QoS target, Mbit/s.
    pub re_mbps: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iters: Option<usize>,
    /// Write wall times as zero so repeated runs are byte-identical.
    pub deterministic: bool,
}

impl RunConfig {
    pub fn new(command: Command, scenario: impl Into<PathBuf>) -> Self {
        Self {
            command,
            scenario: scenario.into(),
            out: PathBuf::from("out"),
            strategy: None,
            de_grid_km: None,
            re_mbps: None,
            epsilon: None,
            max_iters: None,
            deterministic: true,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.command == Command::Sweep && self.de_grid_km.as_ref().is_none_or(|g| g.is_empty()) {
            return Err("sweep requires --de-grid".into());
        }
        if self.command == Command::Baseline && self.strategy == Some(Strategy::Joint) {
            return Err("baseline strategy must be fixed_bandwidth or fixed_timeslot".into());
        }
        if let Some(g) = &self.de_grid_km {
            if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err("radii must be finite and ≥ 0".into());
            }
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(e) = self.epsilon {
            o.epsilon = e;
        }
        if let Some(m) = self.max_iters {
            o.max_iters = m;
        }
        o
    }
}

/// Code and message for an optimizer error.
fn sca_failure(e: &ScaError) -> i32 {
    match e {
        ScaError::InvalidScenario(_) => exit::INVALID_SCENARIO,
        ScaError::InfeasibleAtInitialization(_) => exit::INFEASIBLE,
        _ => exit::SOLVER_FAILURE,
    }
}

/// Run `strategy` and write its artifacts under `dir`. Returns an exit code.
fn optimize_into(
    s: &Scenario,
    strategy: Strategy,
    opts: &SolverOptions,
    dir: &Path,
    deterministic: bool,
    out: &mut dyn Write,
) -> i32 {
    if let Err(e) = fs::create_dir_all(dir) {
        let _ = writeln!(out, "cannot create {}: {e}", dir.display());
        return exit::IO;
    }
    let jsonl_path = dir.join(ITERATIONS_JSONL);
    let mut jsonl = match fs::File::create(&jsonl_path) {
        Ok(f) => std::io::BufWriter::new(f),
        Err(e) => {
            let _ = writeln!(out, "cannot write {}: {e}", jsonl_path.display());
            return exit::IO;
        }
    };
    let mut sink = |r: &IterationRecord| {
        let mut r = r.clone();
        if deterministic {
            r.wall_time_s = 0.0;
        }
        let _ = writeln!(jsonl, "{}", r.to_line());
    };
    let result = run_strategy(s, strategy, opts, Some(&mut sink));
    let _ = jsonl.flush();
    let (sol, log) = match result {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(out, "{}: {e}", strategy.as_str());
            return sca_failure(&e);
        }
    };
    let report = feasibility_report(&sol, s, REPORT_TOL);
    if let Err(e) = emit_report(&sol, &log, s, &report, strategy.as_str(), dir, deterministic) {
        let _ = writeln!(out, "{e}");
        return exit::IO;
    }
    let _ = writeln!(
        out,
        "{}: {} after {} iterations, secrecy {:.6e} bit/s, eve {:.6e} bit/s, {}",
        strategy.as_str(),
        sol.status.as_str(),
        sol.iterations,
        nats_to_bits(sol.secrecy_total),
        nats_to_bits(sol.eve_total),
        report.summary()
    );
    if sol.degraded.is_some() || !report.pass {
        exit::DEGRADED
    } else {
        exit::OK
    }
}

/// Execute one command, writing progress to `out`. Returns the exit code.
pub fn run_command(cfg: &RunConfig, out: &mut dyn Write) -> i32 {
    if let Err(e) = cfg.validate() {
        let _ = writeln!(out, "{e}");
        return exit::USAGE;
    }
    let mut s = match read_scenario(&cfg.scenario) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(out, "{e}");
            return exit::INVALID_SCENARIO;
        }
    };
    if let Some(re) = cfg.re_mbps {
        s.eve_qos_target = mbps_to_nats(re);
    }
    let violations = validate_scenario(&s);
    if cfg.command == Command::Validate {
        for v in &violations {
            let _ = writeln!(out, "{v}");
        }
        let _ = writeln!(out, "{} violations", violations.len());
        return if violations.is_empty() { exit::OK } else { exit::INVALID_SCENARIO };
    }
    if !violations.is_empty() {
        for v in &violations {
            let _ = writeln!(out, "{v}");
        }
        return exit::INVALID_SCENARIO;
    }
    let opts = cfg.solver_options();
    if let Err(e) = opts.validate() {
        let _ = writeln!(out, "{e}");
        return exit::USAGE;
    }
    match cfg.command {
        Command::Optimize => {
            optimize_into(&s, cfg.strategy.unwrap_or(Strategy::Joint), &opts, &cfg.out, cfg.deterministic, out)
        }
        Command::Baseline => {
            let modes = match cfg.strategy {
                Some(m) => vec![m],
                None => vec![Strategy::FixedBandwidth, Strategy::FixedTimeslot],
            };
            modes
                .into_iter()
                .map(|m| optimize_into(&s, m, &opts, &cfg.out.join(m.as_str()), cfg.deterministic, out))
                .fold(exit::OK, |acc, c| if acc == exit::OK { c } else { acc })
        }
        Command::Sweep => {
            let grid: Vec<f64> = cfg.de_grid_km.iter().flatten().map(|km| km * 1000.0).collect();
            let strategies = match cfg.strategy {
                Some(st) => vec![st],
                None => Strategy::ALL.to_vec(),
            };
            let mut rows = match sweep_uncertainty(&s, &grid, &strategies, &opts) {
                Ok(r) => r,
                Err(e) => {
                    let _ = writeln!(out, "{e}");
                    return exit::USAGE;
                }
            };
            if cfg.deterministic {
                rows.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            }
            if let Err(e) = fs::create_dir_all(&cfg.out) {
                let _ = writeln!(out, "cannot create {}: {e}", cfg.out.display());
                return exit::IO;
            }
            let path = cfg.out.join(COMPARISON_CSV);
            let written = fs::File::create(&path)
                .map_err(|e| e.to_string())
                .and_then(|f| write_rows_csv(&rows, f).map_err(|e| e.to_string()));
            if let Err(e) = written {
                let _ = writeln!(out, "cannot write {}: {e}", path.display());
                return exit::IO;
            }
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{} d_e={} m: {} ({})",
                    r.strategy,
                    r.d_e_m,
                    r.secrecy_total.map(|v| format!("{:.6e} bit/s", nats_to_bits(v))).unwrap_or("-".into()),
                    r.status
                );
            }
            let _ = writeln!(out, "{} rows written to {}", rows.len(), path.display());
            if rows.iter().all(|r| r.secrecy_total.is_some()) {
                exit::OK
            } else {
                exit::SOLVER_FAILURE
            }
        }
        Command::Validate => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_bundled() {
        let mut buf = Vec::new();
        let code = run_command(&RunConfig::new(Command::Validate, BUILTIN_SCENARIO), &mut buf);
        assert_eq!(code, exit::OK);
        assert!(String::from_utf8(buf).unwrap().contains("0 violations"));
    }

    #[test]
    fn sweep_needs_grid() {
        let mut buf = Vec::new();
        assert_eq!(run_command(&RunConfig::new(Command::Sweep, BUILTIN_SCENARIO), &mut buf), exit::USAGE);
    }

    #[test]
    fn unreachable_target_exits_infeasible() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(Command::Optimize, BUILTIN_SCENARIO);
        cfg.out = dir.path().to_path_buf();
        cfg.re_mbps = Some(1e9);
        let mut buf = Vec::new();
        assert_eq!(run_command(&cfg, &mut buf), exit::INFEASIBLE);
    }

    #[test]
    fn bad_scenario_path() {
        let mut buf = Vec::new();
        let code = run_command(&RunConfig::new(Command::Validate, "/nonexistent/s.toml"), &mut buf);
        assert_eq!(code, exit::INVALID_SCENARIO);
    }

    #[test]
    fn command_names() {
        for (s, c) in [
            ("optimize", Command::Optimize),
            ("baseline", Command::Baseline),
            ("sweep", Command::Sweep),
            ("validate", Command::Validate),
        ] {
            assert_eq!(Command::parse(s), Some(c));
        }
        assert_eq!(Command::parse("plot"), None);
    }
}
