//! Secrecy-aware trajectory and resource design for a UAV relay that
//! serves a confidential receiver and an untrusted receiver with an
//! uncertain position.

pub mod cli;
pub mod error;
pub mod eval;
pub mod model;
pub mod sca;
pub mod schedule;
pub mod transform;

pub use error::{LoadError, ModelError, ReportError, ScaError, TransformError};
pub use model::{EveRegion, Position3, Scenario};
pub use schedule::{RunStatus, SlotSchedule, Solution};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::cli::{parse_scenario, DEFAULT_MISSION_TOML};
    use crate::model::Scenario;
    use crate::schedule::{RunStatus, SlotSchedule, Solution};

    pub fn default_scenario() -> Scenario {
        parse_scenario(DEFAULT_MISSION_TOML).expect("bundled scenario parses")
    }

    /// Straight-line flight with the whole band on an idle uplink.
    pub fn zero_solution(s: &Scenario) -> Solution {
        let slots = (1..=s.n_slots)
            .map(|n| SlotSchedule {
                q: if n == s.n_slots { s.uav_end } else { s.uav_start.lerp(&s.uav_end, n as f64 / s.n_slots as f64) },
                b1: s.bandwidth_hz,
                b2: 0.0,
                rho: true,
                ..Default::default()
            })
            .collect();
        Solution {
            slots,
            secrecy_total: 0.0,
            eve_total: 0.0,
            surrogate_objective: 0.0,
            status: RunStatus::Converged,
            degraded: None,
            iterations: 0,
        }
    }
}
