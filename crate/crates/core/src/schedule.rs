//! The recovered per-slot schedule shared by the optimizer, the evaluators
//! and the report writer.

use serde::{Deserialize, Serialize};

use crate::model::Position3;

/// Decisions and rates for one time slot. Rates are nat/s, powers W,
/// bandwidths Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotSchedule {
    pub q: Position3,
    pub b1: f64,
    pub b2: f64,
    /// `true` when the downlink serves Bob, `false` when it serves Eve.
    pub rho: bool,
    pub p_a: f64,
    pub p_b: f64,
    pub p_e: f64,
    pub r_ub: f64,
    pub r_ue: f64,
    pub r_b: f64,
    pub r_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    /// The iteration cap was reached before the stopping rule fired.
    MaxIterations,
    /// A subproblem failed after at least one good iterate; the best
    /// iterate so far was returned.
    NumericalFailure,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Slots `1..=N`; the fixed start point `q_0` is not a slot.
    pub slots: Vec<SlotSchedule>,
    /// Exact accumulated secrecy rate, nat/s summed over slots.
    pub secrecy_total: f64,
    /// Accumulated Eve rate, nat/s summed over slots.
    pub eve_total: f64,
    /// Surrogate objective `R_S` of the final subproblem, nat/s.
    pub surrogate_objective: f64,
    pub status: RunStatus,
    /// Set when recovering the binary schedule broke a constraint beyond
    /// tolerance; holds a human-readable reason.
    pub degraded: Option<String>,
    pub iterations: usize,
}

impl Solution {
    pub fn trajectory(&self) -> impl Iterator<Item = &Position3> {
        self.slots.iter().map(|s| &s.q)
    }
}
