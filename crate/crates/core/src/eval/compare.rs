use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ScaError;
use crate::model::Scenario;
use crate::sca::{run_strategy, IterationRecord, SolverOptions};
use crate::schedule::Solution;
use crate::transform::Strategy;

/// Run one of the two reference designs.
pub fn run_baseline(
    s: &Scenario,
    mode: Strategy,
    opts: &SolverOptions,
) -> Result<(Solution, Vec<IterationRecord>), ScaError> {
    if mode == Strategy::Joint {
        return Err(ScaError::InvalidScenario("joint is not a baseline".into()));
    }
    run_strategy(s, mode, opts, None)
}

/// One (strategy, radius) cell of an uncertainty sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: String,
    pub d_e_m: f64,
    /// Eve QoS target, nat/s.
    pub r_e_target: f64,
    pub secrecy_total: Option<f64>,
    pub eve_total: Option<f64>,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// Run status, `degraded`, or the error that stopped the cell.
    pub status: String,
}

/// Run each strategy at each radius, cells in parallel. Rows come back
/// ordered by strategy (as given) then radius.
pub fn sweep_uncertainty(
    s: &Scenario,
    d_e_grid: &[f64],
    strategies: &[Strategy],
    opts: &SolverOptions,
) -> Result<Vec<ComparisonRow>, String> {
    if d_e_grid.is_empty() {
        return Err("radius grid is empty".into());
    }
    if d_e_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err("radius grid must be strictly ascending".into());
    }
    let cells: Vec<(Strategy, f64)> =
        strategies.iter().flat_map(|&st| d_e_grid.iter().map(move |&d| (st, d))).collect();
    Ok(cells
        .par_iter()
        .map(|&(strategy, d_e)| {
            let scenario = s.with_eve_radius(d_e);
            let t0 = Instant::now();
            let result = run_strategy(&scenario, strategy, opts, None);
            let wall = t0.elapsed().as_secs_f64();
            match result {
                Ok((sol, _)) => ComparisonRow {
                    strategy: strategy.as_str().into(),
                    d_e_m: d_e,
                    r_e_target: s.eve_qos_target,
                    secrecy_total: Some(sol.secrecy_total),
                    eve_total: Some(sol.eve_total),
                    iterations: sol.iterations,
                    wall_time_s: wall,
                    status: match &sol.degraded {
                        Some(_) => "degraded".into(),
                        None => sol.status.as_str().into(),
                    },
                },
                Err(e) => ComparisonRow {
                    strategy: strategy.as_str().into(),
                    d_e_m: d_e,
                    r_e_target: s.eve_qos_target,
                    secrecy_total: None,
                    eve_total: None,
                    iterations: 0,
                    wall_time_s: wall,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect())
}

pub fn write_rows_csv<W: Write>(rows: &[ComparisonRow], w: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::default_scenario;

    #[test]
    fn grid_must_ascend() {
        let s = default_scenario();
        let o = SolverOptions::default();
        assert!(sweep_uncertainty(&s, &[], &Strategy::ALL, &o).is_err());
        assert!(sweep_uncertainty(&s, &[300.0, 0.0], &Strategy::ALL, &o).is_err());
    }

    #[test]
    fn failing_cells_are_recorded() {
        // an unreachable target fails every cell before any solve
        let s = default_scenario().with_eve_qos_target(1e12);
        let rows = sweep_uncertainty(&s, &[0.0, 150.0, 300.0], &Strategy::ALL, &SolverOptions::default()).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.status.starts_with("error") && r.secrecy_total.is_none()));
        assert_eq!(rows[3].strategy, "fixed_bandwidth");
        assert_eq!(rows[4].d_e_m, 150.0);
        let mut buf = Vec::new();
        write_rows_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("strategy,d_e_m,r_e_target,secrecy_total,eve_total,iterations,wall_time_s,status"));
    }

    #[test]
    fn joint_is_not_a_baseline() {
        let s = default_scenario();
        assert!(run_baseline(&s, Strategy::Joint, &SolverOptions::default()).is_err());
    }
}
