//! Independent audits of optimizer output and strategy comparisons.
//!
//! Everything here recomputes from the exact model; nothing depends on the
//! surrogate construction.

mod compare;
mod feasibility;
mod scan;

pub use compare::{run_baseline, sweep_uncertainty, write_rows_csv, ComparisonRow};
pub use feasibility::{exact_secrecy_objective, feasibility_report, FamilyResidual, FeasibilityReport, REPORT_TOL};
pub use scan::{eve_grid, slot_leakage, worst_case_eve_scan, EveScan};
