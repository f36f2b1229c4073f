//! The iterative penalty-SCA driver and schedule recovery.

mod backend;
mod driver;
mod recover;

pub use backend::{solve_subproblem, BackendOutput, ClarabelBackend, ConicBackend};
pub use driver::{
    eve_rate_ceiling, init_iterate, run_sca, run_strategy, update_fixed_points, update_penalty_state,
    IterationRecord, Phase, SolverOptions, LAMBDA_CAP_FACTOR,
};
pub use recover::{exact_split, recover_schedule};
