use serde::{Deserialize, Serialize};

use crate::model::Position3;

use super::program::{ConvexProgram, VarKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

/// Subproblem variables of one slot in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotValues {
    pub q: Position3,
    pub b1: f64,
    pub eta: f64,
    pub tau: f64,
    pub alpha: [f64; 3],
    pub mu: [f64; 3],
    pub theta: f64,
    pub r_ub: f64,
    pub r_ue: f64,
    pub r_b: f64,
    pub r_e: f64,
    /// Orthogonality penalty epigraph, Hz².
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSolution {
    pub status: SolveStatus,
    /// Objective in nat/s (the program objective times its unit).
    pub objective: f64,
    /// Raw primal values in program units.
    pub values: Vec<f64>,
    pub slots: Vec<SlotValues>,
    /// Eve-QoS shortfall when the requirement was elastic, nat/s.
    pub qos_slack: f64,
    /// Largest constraint violation at `values`, program units.
    pub max_violation: f64,
    pub diagnostics: String,
}

impl SubproblemSolution {
    /// Map raw program values back onto named SI quantities.
    pub fn decode(program: &ConvexProgram, status: SolveStatus, values: Vec<f64>, diagnostics: String) -> Self {
        let n_slots = program.vars.iter().filter_map(|v| v.slot).max().unwrap_or(0);
        let mut slots = vec![SlotValues::default(); n_slots];
        let mut qos_slack = 0.0;
        let usable = values.len() == program.n_vars();
        if usable {
            for (info, &raw) in program.vars.iter().zip(&values) {
                let v = raw * info.unit;
                if info.kind == VarKind::QosSlack {
                    qos_slack = v;
                    continue;
                }
                let Some(n) = info.slot else { continue };
                let sl = &mut slots[n - 1];
                match info.kind {
                    VarKind::Qx => sl.q.x = v,
                    VarKind::Qy => sl.q.y = v,
                    VarKind::Qz => sl.q.z = v,
                    VarKind::B1 => sl.b1 = v,
                    VarKind::Eta => sl.eta = v,
                    VarKind::Tau => sl.tau = v,
                    VarKind::AlphaA => sl.alpha[0] = v,
                    VarKind::AlphaB => sl.alpha[1] = v,
                    VarKind::AlphaE => sl.alpha[2] = v,
                    VarKind::MuA => sl.mu[0] = v,
                    VarKind::MuB => sl.mu[1] = v,
                    VarKind::MuE => sl.mu[2] = v,
                    VarKind::Theta => sl.theta = v,
                    VarKind::Rub => sl.r_ub = v,
                    VarKind::Rue => sl.r_ue = v,
                    VarKind::Rb => sl.r_b = v,
                    VarKind::Re => sl.r_e = v,
                    VarKind::Penalty => sl.penalty = v,
                    _ => {}
                }
            }
        }
        let (objective, max_violation) = if usable {
            (program.objective.eval(&values) * program.objective_unit, program.max_violation(&values))
        } else {
            (f64::NAN, f64::INFINITY)
        };
        Self { status, objective, values, slots, qos_slack, max_violation, diagnostics }
    }
}
