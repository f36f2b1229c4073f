//! Pluggable conic backends for the convex subproblems.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use crate::transform::program::{Cone, ConvexProgram, LinExpr};
use crate::transform::{SolveStatus, SubproblemSolution};

/// Raw result of a backend call, values in program units.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendOutput {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub diagnostics: String,
}

/// Anything that can solve a [`ConvexProgram`]. Implementations must be
/// deterministic for identical inputs and safe to share between threads.
pub trait ConicBackend: std::fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, program: &ConvexProgram) -> BackendOutput;
}

pub fn solve_subproblem(program: &ConvexProgram, backend: &dyn ConicBackend) -> SubproblemSolution {
    if let Err(e) = program.validate() {
        return SubproblemSolution::decode(program, SolveStatus::NumericalFailure, Vec::new(), e.to_string());
    }
    let out = backend.solve(program);
    SubproblemSolution::decode(program, out.status, out.x, out.diagnostics)
}

/// Interior-point backend built on the Clarabel conic solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarabelBackend {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: u32,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        Self { tol_feas: 1e-8, tol_gap: 1e-8, max_iter: 200 }
    }
}

enum Block {
    Zero(usize),
    NonNeg(usize),
    Soc(usize),
    Exp,
}

struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    // Clarabel form: A x + s = b with s in the cone, so s = e(x) gives
    // A = -coefs and b = constant.
    fn push(&mut self, e: &LinExpr) {
        let row = self.b.len();
        for &(var, c) in &e.terms {
            if c != 0.0 {
                self.i.push(row);
                self.j.push(var.0);
                self.v.push(-c);
            }
        }
        self.b.push(e.constant);
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn solve(&self, program: &ConvexProgram) -> BackendOutput {
        let n = program.n_vars();
        let mut rows = Rows { i: Vec::new(), j: Vec::new(), v: Vec::new(), b: Vec::new() };
        let mut blocks: Vec<Block> = Vec::new();
        for c in &program.constraints {
            match &c.cone {
                Cone::Zero(e) => {
                    rows.push(e);
                    match blocks.last_mut() {
                        Some(Block::Zero(k)) => *k += 1,
                        _ => blocks.push(Block::Zero(1)),
                    }
                }
                Cone::NonNeg(e) => {
                    rows.push(e);
                    match blocks.last_mut() {
                        Some(Block::NonNeg(k)) => *k += 1,
                        _ => blocks.push(Block::NonNeg(1)),
                    }
                }
                Cone::SecondOrder(es) => {
                    es.iter().for_each(|e| rows.push(e));
                    blocks.push(Block::Soc(es.len()));
                }
                Cone::Exp { a, b, c } => {
                    // Clarabel orders the triple as (x, y, z) with y·exp(x/y) ≤ z
                    rows.push(c);
                    rows.push(b);
                    rows.push(a);
                    blocks.push(Block::Exp);
                }
            }
        }
        let cones: Vec<SupportedConeT<f64>> = blocks
            .iter()
            .map(|b| match *b {
                Block::Zero(k) => SupportedConeT::ZeroConeT(k),
                Block::NonNeg(k) => SupportedConeT::NonnegativeConeT(k),
                Block::Soc(k) => SupportedConeT::SecondOrderConeT(k),
                Block::Exp => SupportedConeT::ExponentialConeT(),
            })
            .collect();
        let m = rows.b.len();
        let a = CscMatrix::new_from_triplets(m, n, rows.i, rows.j, rows.v);
        let p = CscMatrix::zeros((n, n));
        let mut q = vec![0.0; n];
        for &(var, c) in &program.objective.terms {
            q[var.0] -= c;
        }
        // programs arrive in normalized units and rescaling them again
        // hurts the cones pinned at the bandwidth floor, so equilibration
        // is only a fallback
        let first = self.attempt(&p, &q, &a, &rows.b, &cones, false);
        if first.status.is_usable() || first.status == SolveStatus::Infeasible {
            return first;
        }
        let second = self.attempt(&p, &q, &a, &rows.b, &cones, true);
        if second.status.is_usable() {
            second
        } else {
            first
        }
    }
}

impl ClarabelBackend {
    fn attempt(
        &self,
        p: &CscMatrix<f64>,
        q: &[f64],
        a: &CscMatrix<f64>,
        b: &[f64],
        cones: &[SupportedConeT<f64>],
        equilibrate: bool,
    ) -> BackendOutput {
        let settings = match DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(self.max_iter)
            .tol_feas(self.tol_feas)
            .tol_gap_abs(self.tol_gap)
            .tol_gap_rel(self.tol_gap)
            .equilibrate_enable(equilibrate)
            .build()
        {
            Ok(s) => s,
            Err(e) => {
                return BackendOutput {
                    status: SolveStatus::NumericalFailure,
                    x: Vec::new(),
                    diagnostics: format!("settings: {e}"),
                }
            }
        };
        let mut solver = match DefaultSolver::new(p, q, a, b, cones, settings) {
            Ok(s) => s,
            Err(e) => {
                return BackendOutput {
                    status: SolveStatus::NumericalFailure,
                    x: Vec::new(),
                    diagnostics: format!("setup: {e}"),
                }
            }
        };
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
            // a stalled run still hands back its best iterate; keep it when
            // it is accurate enough to expand around
            SolverStatus::InsufficientProgress | SolverStatus::NumericalError | SolverStatus::MaxIterations
                if stalled_but_close(sol.r_prim, sol.r_dual, sol.obj_val, sol.obj_val_dual) =>
            {
                SolveStatus::NearOptimal
            }
            _ => SolveStatus::NumericalFailure,
        };
        let diagnostics = format!(
            "{:?} after {} iterations, r_prim {:.3e}, r_dual {:.3e}, objective {:.6e} (dual {:.6e})",
            sol.status, sol.iterations, sol.r_prim, sol.r_dual, sol.obj_val, sol.obj_val_dual
        );
        let x = if status.is_usable() { sol.x.clone() } else { Vec::new() };
        BackendOutput { status, x, diagnostics }
    }
}

/// Residual and relative-gap ceilings for accepting a stalled solve.
const STALL_RESIDUAL: f64 = 1e-6;
const STALL_GAP: f64 = 1e-3;

fn stalled_but_close(r_prim: f64, r_dual: f64, primal: f64, dual: f64) -> bool {
    let gap = (primal - dual).abs() / primal.abs().max(1.0);
    r_prim <= STALL_RESIDUAL && r_dual <= STALL_RESIDUAL && gap <= STALL_GAP
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::program::{perspective_log_hypograph, VarKind};

    #[test]
    fn single_cone_program() {
        let mut p = ConvexProgram::new();
        let t = p.add_var(VarKind::Free, None, 1.0);
        p.objective = LinExpr::var(t);
        p.push("rate", None, perspective_log_hypograph(LinExpr::constant(1.0), LinExpr::constant(1.0), LinExpr::var(t)));
        let sol = solve_subproblem(&p, &ClarabelBackend::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 2f64.ln()).abs() < 1e-7, "{}", sol.objective);
    }

    #[test]
    fn contradictory_equalities() {
        let mut p = ConvexProgram::new();
        let b1 = p.add_var(VarKind::B1, Some(1), 1.0);
        p.objective = LinExpr::var(b1);
        p.push("pin", None, Cone::Zero(LinExpr::var(b1) + (-1.0)));
        p.push("pin", None, Cone::Zero(LinExpr::var(b1)));
        let sol = solve_subproblem(&p, &ClarabelBackend::default());
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn deterministic_values() {
        let mut p = ConvexProgram::new();
        let x = p.add_var(VarKind::Free, None, 1.0);
        let y = p.add_var(VarKind::Free, None, 1.0);
        p.objective = LinExpr::var(x) + LinExpr::var(y);
        p.push("ball", None, Cone::SecondOrder(vec![LinExpr::constant(1.0), LinExpr::var(x), LinExpr::var(y)]));
        let a = solve_subproblem(&p, &ClarabelBackend::default());
        let b = solve_subproblem(&p, &ClarabelBackend::default());
        assert_eq!(a.values, b.values);
        assert!((a.objective - 2f64.sqrt()).abs() < 1e-7);
    }
}
