//! Convex subproblem construction: tangent surrogates, penalty
//! augmentation and the solver-neutral conic encoding.

mod assemble;
mod iterate;
pub mod program;
mod solution;
pub mod surrogate;

pub use assemble::{
    assemble_subproblem, iterate_point, AssemblyOptions, Branch, EveModel, QosMode, Strategy, Units,
    BANDWIDTH_FLOOR, LEN_UNIT_M, STEP_MARGIN,
};
pub use iterate::{Iterate, SlotIterate, LINK_A, LINK_B, LINK_E, TRAJECTORY_TOL_M};
pub use program::{ConvexProgram, Cone, LinExpr, VarId, VarKind};
pub use solution::{SlotValues, SolveStatus, SubproblemSolution};
pub use surrogate::{agm_bound, quad_over_lin_lower_bound, secrecy_surrogate_term, theta_rhs_linearization};
