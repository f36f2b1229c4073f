use serde::{Deserialize, Serialize};

use crate::error::TransformError;
use crate::model::{Position3, Scenario};

/// Index into the `[a, b, e]` triples of per-link quantities.
pub const LINK_A: usize = 0;
pub const LINK_B: usize = 1;
pub const LINK_E: usize = 2;

/// Expansion point and penalty state for one slot, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotIterate {
    pub q: Position3,
    /// Square roots of the Alice, Bob-stream and Eve-stream powers, √W.
    pub alpha: [f64; 3],
    /// Upper bounds on the squared distances to Alice, Bob and the far
    /// edge of Eve's disc, m².
    pub mu: [f64; 3],
    /// Upper bound on `α_b² / d_s`, W/m².
    pub theta: f64,
    pub eta: f64,
    pub tau: f64,
    /// Tightening point of the orthogonality bound, `√(η/τ)`.
    pub psi: f64,
    /// Penalty weight, in units of the `B`-normalized objective per
    /// `B`-normalized bandwidth squared.
    pub lambda: f64,
    /// Penalty step, same units as `lambda`.
    pub delta: f64,
}

/// The fixed points carried from one convex subproblem to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub slots: Vec<SlotIterate>,
}

/// Trajectory slack accepted when checking an iterate, m.
pub const TRAJECTORY_TOL_M: f64 = 1e-6;

impl Iterate {
    pub fn validate(&self, s: &Scenario) -> Result<(), TransformError> {
        let bad = |msg: String| Err(TransformError::InvalidIterate(msg));
        if self.slots.len() != s.n_slots {
            return bad(format!("{} slots, scenario has {}", self.slots.len(), s.n_slots));
        }
        let bw_tol = 1e-9 * s.bandwidth_hz;
        let mut prev = s.uav_start;
        for (i, sl) in self.slots.iter().enumerate() {
            let n = i + 1;
            if !sl.q.is_finite() {
                return bad(format!("slot {n}: non-finite position"));
            }
            let scalars = [
                ("alpha_a", sl.alpha[0]),
                ("alpha_b", sl.alpha[1]),
                ("alpha_e", sl.alpha[2]),
                ("mu_a", sl.mu[0]),
                ("mu_b", sl.mu[1]),
                ("mu_e", sl.mu[2]),
                ("theta", sl.theta),
                ("eta", sl.eta),
                ("tau", sl.tau),
                ("psi", sl.psi),
                ("lambda", sl.lambda),
                ("delta", sl.delta),
            ];
            for (name, v) in scalars {
                if !(v.is_finite() && v >= 0.0) {
                    return bad(format!("slot {n}: {name} = {v} is not finite and ≥ 0"));
                }
            }
            if sl.eta + sl.tau > s.bandwidth_hz + bw_tol {
                return bad(format!("slot {n}: eta + tau = {} > B", sl.eta + sl.tau));
            }
            if (sl.q.z - s.altitude_m).abs() > TRAJECTORY_TOL_M {
                return bad(format!("slot {n}: altitude {} ≠ H", sl.q.z));
            }
            let step = sl.q.dist(&prev);
            if step > s.max_step_m() + TRAJECTORY_TOL_M {
                return bad(format!("slot {n}: step {step} m exceeds D = {} m", s.max_step_m()));
            }
            prev = sl.q;
        }
        if let Some(last) = self.slots.last() {
            if last.q.dist(&s.uav_end) > TRAJECTORY_TOL_M {
                return bad(format!("final position is {} m from s_F", last.q.dist(&s.uav_end)));
            }
        }
        Ok(())
    }

    /// Largest per-slot `η·τ`, Hz².
    pub fn max_overlap(&self) -> f64 {
        self.slots.iter().map(|s| s.eta * s.tau).fold(0.0, f64::max)
    }
}
