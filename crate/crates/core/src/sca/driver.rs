use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::ScaError;
use crate::model::{eve_distance_bounds, validate_scenario, Scenario};
use crate::schedule::{RunStatus, Solution};
use crate::transform::{
    agm_bound, assemble_subproblem, AssemblyOptions, EveModel, Iterate, QosMode, SlotIterate, SolveStatus,
    Strategy, SubproblemSolution, BANDWIDTH_FLOOR, LINK_A, LINK_B, LINK_E,
};

use super::backend::{solve_subproblem, ClarabelBackend, ConicBackend};
use super::recover::recover_schedule;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Stop once the relative change of the surrogate objective drops
    /// below this.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Initial penalty weight in `B`-normalized units.
    pub lambda_init: f64,
    /// Penalty step in `B`-normalized units.
    pub delta_step: f64,
    /// Bound on `max_n η_n·τ_n` required at exit, as a fraction of `B²`.
    pub orthogonality_tol: f64,
    pub backend: Arc<dyn ConicBackend>,
    pub eve_model: EveModel,
    /// Initial price per `B`-normalized unit of Eve-QoS shortfall while
    /// searching for a feasible start.
    pub restoration_weight: f64,
    /// Ceiling on that price as it escalates.
    pub restoration_weight_max: f64,
    pub restoration_max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_iters: 100,
            lambda_init: 1e-2,
            delta_step: 1.0,
            orthogonality_tol: 1e-4,
            backend: Arc::new(ClarabelBackend::default()),
            eve_model: EveModel::Disc,
            restoration_weight: 1.0,
            restoration_weight_max: 1e3,
            restoration_max_iters: 50,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0) {
            return Err(format!("epsilon = {} must be > 0", self.epsilon));
        }
        if self.max_iters < 1 {
            return Err("max_iters must be ≥ 1".into());
        }
        for (name, v) in [
            ("lambda_init", self.lambda_init),
            ("delta_step", self.delta_step),
            ("orthogonality_tol", self.orthogonality_tol),
            ("restoration_weight", self.restoration_weight),
            ("restoration_weight_max", self.restoration_weight_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} = {v} must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// Ceiling on the penalty weight relative to its initial value.
pub const LAMBDA_CAP_FACTOR: f64 = 1e9;

/// Per-iteration growth of the restoration shortfall price.
pub const RESTORATION_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Driving the Eve-QoS shortfall to zero from the initial guess.
    Restoration,
    Main,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Restoration => "restoration",
            Phase::Main => "main",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub phase: Phase,
    /// `R_S` of this subproblem, nat/s.
    pub surrogate_objective: f64,
    /// Secrecy total of the schedule recovered from this subproblem.
    pub exact_objective: f64,
    /// `max_n η_n τ_n`, Hz².
    pub max_overlap: f64,
    /// Largest per-slot displacement from the previous trajectory, m.
    pub max_move_m: f64,
    /// Eve-QoS shortfall, nat/s (restoration only).
    pub qos_slack: f64,
    /// Relative surrogate-objective change; absent on the first main step.
    pub rel_change: Option<f64>,
    pub status: SolveStatus,
    pub wall_time_s: f64,
}

impl IterationRecord {
    /// One JSON object, no trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// Straight-line start with equal bandwidth thirds and half-power links.
pub fn init_iterate(s: &Scenario, lambda_init: f64, delta_step: f64) -> Result<Iterate, ScaError> {
    let violations = validate_scenario(s);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(ScaError::InvalidScenario(text.join("; ")));
    }
    let n_slots = s.n_slots;
    let third = s.bandwidth_hz / 3.0;
    let a_root = (0.5 * s.p_alice_max).sqrt();
    let u_root = (0.5 * s.p_uav_max).sqrt();
    let slots = (1..=n_slots)
        .map(|n| {
            let q = if n == n_slots {
                s.uav_end
            } else {
                s.uav_start.lerp(&s.uav_end, n as f64 / n_slots as f64)
            };
            let (d_s, d_w) = eve_distance_bounds(&q, &s.eve);
            SlotIterate {
                q,
                alpha: [a_root, u_root, u_root],
                mu: [q.dist_sq(&s.alice_pos), q.dist_sq(&s.bob_pos), d_w],
                theta: u_root * u_root / d_s,
                eta: third,
                tau: third,
                psi: 1.0,
                lambda: lambda_init,
                delta: delta_step,
            }
        })
        .collect();
    Ok(Iterate { slots })
}

/// Copy the subproblem solution into the next expansion point.
///
/// Bandwidths are floored, powers clipped to their caps, and the altitude
/// and final position snapped onto their pinned values.
pub fn update_fixed_points(s: &Scenario, it: &Iterate, sol: &SubproblemSolution) -> Result<Iterate, ScaError> {
    if !sol.status.is_usable() {
        return Err(ScaError::NotOptimal(sol.status.as_str().into()));
    }
    if sol.slots.len() != it.slots.len() {
        return Err(ScaError::NotOptimal(format!(
            "solution has {} slots, iterate {}",
            sol.slots.len(),
            it.slots.len()
        )));
    }
    let floor = BANDWIDTH_FLOOR * s.bandwidth_hz;
    let caps = [s.p_alice_max.sqrt(), s.p_uav_max.sqrt(), s.p_uav_max.sqrt()];
    let n_slots = it.slots.len();
    let slots = it
        .slots
        .iter()
        .zip(&sol.slots)
        .enumerate()
        .map(|(i, (old, v))| {
            let mut q = v.q;
            q.z = s.altitude_m;
            if i + 1 == n_slots {
                q = s.uav_end;
            }
            let mut alpha = v.alpha;
            let mut mu = v.mu;
            for k in [LINK_A, LINK_B, LINK_E] {
                alpha[k] = alpha[k].clamp(0.0, caps[k]);
                mu[k] = mu[k].max(f64::MIN_POSITIVE);
            }
            let (mut eta, mut tau) = (v.eta.max(floor), v.tau.max(floor));
            // solver round-off can push the downlink share past B − floor
            let room = s.bandwidth_hz - floor;
            if eta + tau > room {
                let k = room / (eta + tau);
                eta = (eta * k).max(floor);
                tau = (tau * k).max(floor);
            }
            SlotIterate { q, alpha, mu, theta: v.theta.max(0.0), eta, tau, ..*old }
        })
        .collect();
    Ok(Iterate { slots })
}

/// Refresh the orthogonality tightening points and step the penalty
/// weights: `λ ← λ + δ·½((η/ψ)² + (τψ)²)` with the pre-update `ψ`, then
/// `ψ ← √(η/τ)`.
pub fn update_penalty_state(s: &Scenario, it: &Iterate, sol: &SubproblemSolution, lambda_cap: f64) -> Iterate {
    let b = s.bandwidth_hz;
    let floor = BANDWIDTH_FLOOR;
    let slots = it
        .slots
        .iter()
        .zip(&sol.slots)
        .map(|(old, v)| {
            let eta = (v.eta / b).max(floor);
            let tau = (v.tau / b).max(floor);
            let bound = agm_bound(eta, tau, old.psi).unwrap_or(0.0);
            SlotIterate {
                lambda: (old.lambda + old.delta * bound).min(lambda_cap),
                psi: (eta / tau).sqrt(),
                ..*old
            }
        })
        .collect();
    Iterate { slots }
}

fn max_move(a: &Iterate, b: &Iterate) -> f64 {
    a.slots.iter().zip(&b.slots).map(|(x, y)| x.q.dist(&y.q)).fold(0.0, f64::max)
}

fn overlap(sol: &SubproblemSolution) -> f64 {
    sol.slots.iter().map(|v| v.eta.max(0.0) * v.tau.max(0.0)).fold(0.0, f64::max)
}

/// Largest Eve rate any schedule could deliver: full bandwidth, full power,
/// UAV at its altitude straight above the nearest possible Eve position.
pub fn eve_rate_ceiling(s: &Scenario) -> f64 {
    let b = s.bandwidth_hz;
    let h2 = s.altitude_m * s.altitude_m;
    s.n_slots as f64 * b * (s.norm_gain() * s.p_uav_max / (b * h2)).ln_1p()
}

/// Run the joint design.
pub fn run_sca(s: &Scenario, opts: &SolverOptions) -> Result<(Solution, Vec<IterationRecord>), ScaError> {
    run_strategy(s, Strategy::Joint, opts, None)
}

/// Run the iterative design with the resource-sharing rule `strategy`,
/// streaming each iteration record to `sink` if given.
pub fn run_strategy(
    s: &Scenario,
    strategy: Strategy,
    opts: &SolverOptions,
    mut sink: Option<&mut dyn FnMut(&IterationRecord)>,
) -> Result<(Solution, Vec<IterationRecord>), ScaError> {
    opts.validate().map_err(ScaError::InvalidScenario)?;
    let mut it = init_iterate(s, opts.lambda_init, opts.delta_step)?;
    let ceiling = eve_rate_ceiling(s);
    if s.eve_qos_target > ceiling {
        return Err(ScaError::InfeasibleAtInitialization(format!(
            "R_E = {} nat/s exceeds the ceiling {} nat/s",
            s.eve_qos_target, ceiling
        )));
    }
    let lambda_cap = opts.lambda_init * LAMBDA_CAP_FACTOR;
    let backend = opts.backend.as_ref();
    let mut log: Vec<IterationRecord> = Vec::new();
    let mut emit = |rec: IterationRecord, log: &mut Vec<IterationRecord>| {
        if let Some(f) = sink.as_mut() {
            f(&rec);
        }
        log.push(rec);
    };
    let assembly = |qos| AssemblyOptions { strategy, eve_model: opts.eve_model, qos };
    let slack_tol = 1e-9 * s.bandwidth_hz;
    let mut iter = 0usize;

    // Feasible start: if the straight-line guess cannot meet the Eve QoS
    // target, iterate on the elastic problem until the shortfall vanishes.
    let mut first = {
        let t0 = Instant::now();
        let p = assemble_subproblem(s, &it, &assembly(QosMode::Hard))?;
        (solve_subproblem(&p, backend), t0)
    };
    if !first.0.status.is_usable() {
        let mut cleared = false;
        // Start the shortfall price near par with secrecy and escalate. A
        // steep price on the first step hands every slot to Eve, and a slot
        // whose η sits at the floor never comes back.
        let mut weight = opts.restoration_weight;
        for _ in 0..opts.restoration_max_iters {
            let t0 = Instant::now();
            let p = assemble_subproblem(s, &it, &assembly(QosMode::Elastic { weight }))?;
            let sol = solve_subproblem(&p, backend);
            iter += 1;
            if !sol.status.is_usable() {
                return Err(ScaError::InfeasibleAtInitialization(format!(
                    "restoration subproblem failed: {}",
                    sol.diagnostics
                )));
            }
            let next = update_fixed_points(s, &it, &sol)?;
            let next = update_penalty_state(s, &next, &sol, lambda_cap);
            let exact = recover_schedule(&sol, s, strategy, 0, RunStatus::Converged).secrecy_total;
            emit(
                IterationRecord {
                    iter,
                    phase: Phase::Restoration,
                    surrogate_objective: sol.objective,
                    exact_objective: exact,
                    max_overlap: overlap(&sol),
                    max_move_m: max_move(&it, &next),
                    qos_slack: sol.qos_slack,
                    rel_change: None,
                    status: sol.status,
                    wall_time_s: t0.elapsed().as_secs_f64(),
                },
                &mut log,
            );
            it = next;
            weight = (weight * RESTORATION_GROWTH).min(opts.restoration_weight_max);
            if sol.qos_slack <= slack_tol {
                cleared = true;
                break;
            }
        }
        if !cleared {
            let short = log.last().map(|r| r.qos_slack).unwrap_or(f64::NAN);
            return Err(ScaError::InfeasibleAtInitialization(format!(
                "Eve QoS shortfall of {short} nat/s remains after {} restoration iterations",
                opts.restoration_max_iters
            )));
        }
        let t0 = Instant::now();
        let p = assemble_subproblem(s, &it, &assembly(QosMode::Hard))?;
        first = (solve_subproblem(&p, backend), t0);
        if !first.0.status.is_usable() {
            return Err(ScaError::NumericalFailure(first.0.diagnostics));
        }
    }

    let mut best: Option<SubproblemSolution> = None;
    let mut prev_obj: Option<f64> = None;
    let mut status = RunStatus::MaxIterations;
    let mut pending = Some(first);
    let mut main_iters = 0usize;
    while main_iters < opts.max_iters {
        let (sol, t0) = match pending.take() {
            Some(x) => x,
            None => {
                let t0 = Instant::now();
                let p = assemble_subproblem(s, &it, &assembly(QosMode::Hard))?;
                (solve_subproblem(&p, backend), t0)
            }
        };
        main_iters += 1;
        iter += 1;
        if !sol.status.is_usable() {
            emit(
                IterationRecord {
                    iter,
                    phase: Phase::Main,
                    surrogate_objective: f64::NAN,
                    exact_objective: f64::NAN,
                    max_overlap: f64::NAN,
                    max_move_m: 0.0,
                    qos_slack: 0.0,
                    rel_change: None,
                    status: sol.status,
                    wall_time_s: t0.elapsed().as_secs_f64(),
                },
                &mut log,
            );
            status = RunStatus::NumericalFailure;
            break;
        }
        let next = update_fixed_points(s, &it, &sol)?;
        let next = update_penalty_state(s, &next, &sol, lambda_cap);
        let rel_change = prev_obj.map(|p: f64| (sol.objective - p).abs() / p.abs().max(f64::MIN_POSITIVE));
        let ov = overlap(&sol);
        let exact = recover_schedule(&sol, s, strategy, 0, RunStatus::Converged).secrecy_total;
        emit(
            IterationRecord {
                iter,
                phase: Phase::Main,
                surrogate_objective: sol.objective,
                exact_objective: exact,
                max_overlap: ov,
                max_move_m: max_move(&it, &next),
                qos_slack: 0.0,
                rel_change,
                status: sol.status,
                wall_time_s: t0.elapsed().as_secs_f64(),
            },
            &mut log,
        );
        prev_obj = Some(sol.objective);
        it = next;
        best = Some(sol);
        let orthogonal = ov <= opts.orthogonality_tol * s.bandwidth_hz * s.bandwidth_hz;
        if rel_change.is_some_and(|e| e < opts.epsilon) && orthogonal {
            status = RunStatus::Converged;
            break;
        }
    }
    let Some(best) = best else {
        return Err(ScaError::NumericalFailure("no usable subproblem solution".into()));
    };
    Ok((recover_schedule(&best, s, strategy, iter, status), log))
}
