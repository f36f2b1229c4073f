//! Builds the convex subproblem around an iterate.
//!
//! Inside the program every quantity is rescaled so the numbers the conic
//! backend sees are of order one: lengths in km, bandwidths and rates in
//! units of the total bandwidth `B` (rates in `B` nat/s), powers in W.
//! Each registered variable records the factor back to SI.

use serde::{Deserialize, Serialize};

use crate::error::TransformError;
use crate::model::{Position3, Scenario};

use super::iterate::{Iterate, LINK_A, LINK_B, LINK_E};
use super::program::{perspective_log_hypograph, Cone, ConvexProgram, LinExpr, VarId, VarKind};
use super::surrogate::{quad_over_lin_lower_bound, secrecy_surrogate_term, theta_rhs_linearization};

/// Program length unit, m.
pub const LEN_UNIT_M: f64 = 1000.0;

/// Lower bound on `b1`, `η`, `τ` as a fraction of `B`.
pub const BANDWIDTH_FLOOR: f64 = 1e-9;

/// Relative margin taken off the per-slot flight distance so that solver
/// round-off never pushes a step past `D`.
pub const STEP_MARGIN: f64 = 1e-6;

/// Resource-sharing rule imposed on the subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Everything optimized jointly.
    Joint,
    /// Uplink and downlink each pinned to half the bandwidth.
    FixedBandwidth,
    /// Even slots (0-based) reserved for Bob, odd slots for Eve.
    FixedTimeslot,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Joint, Strategy::FixedBandwidth, Strategy::FixedTimeslot];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Joint => "joint",
            Strategy::FixedBandwidth => "fixed_bandwidth",
            Strategy::FixedTimeslot => "fixed_timeslot",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Which downlink a slot is pinned to, if any.
    pub fn pinned_branch(&self, slot_index: usize) -> Option<Branch> {
        match self {
            Strategy::FixedTimeslot if slot_index % 2 == 0 => Some(Branch::Bob),
            Strategy::FixedTimeslot => Some(Branch::Eve),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Bob,
    Eve,
}

/// How the eavesdropper's position enters the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveModel {
    /// Worst case over the uncertainty disc, via a ground-distance epigraph.
    Disc,
    /// Eve exactly at the disc center; no ground-distance variables.
    Point,
}

/// Treatment of the accumulated Eve-rate requirement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QosMode {
    Hard,
    /// Shortfall allowed through a slack charged `weight` per unit of
    /// `B`-normalized rate.
    Elastic { weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub strategy: Strategy,
    pub eve_model: EveModel,
    pub qos: QosMode,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { strategy: Strategy::Joint, eve_model: EveModel::Disc, qos: QosMode::Hard }
    }
}

/// Conversion between SI and program units for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub len: f64,
    pub bw: f64,
}

impl Units {
    pub fn for_scenario(s: &Scenario) -> Self {
        Self { len: LEN_UNIT_M, bw: s.bandwidth_hz }
    }

    pub fn area(&self) -> f64 {
        self.len * self.len
    }

    /// `γ` expressed for B-normalized bandwidth and km distances.
    pub fn gamma(&self, s: &Scenario) -> f64 {
        s.norm_gain() / (self.bw * self.area())
    }

    fn pos(&self, p: &Position3) -> [f64; 3] {
        [p.x / self.len, p.y / self.len, p.z / self.len]
    }
}

struct SlotVars {
    q: [VarId; 3],
    b1: VarId,
    eta: VarId,
    tau: VarId,
    alpha: [VarId; 3],
    mu: [VarId; 3],
    theta: VarId,
    r_ub: VarId,
    r_ue: VarId,
    r_b: VarId,
    r_e: VarId,
    ground: Option<VarId>,
    penalty: Option<VarId>,
}

fn diff(q: [VarId; 3], p: [f64; 3]) -> [LinExpr; 3] {
    [
        LinExpr::var(q[0]) + (-p[0]),
        LinExpr::var(q[1]) + (-p[1]),
        LinExpr::var(q[2]) + (-p[2]),
    ]
}

/// `‖q − p‖² ≤ bound` as a rotated second-order cone.
fn sq_dist_within(q: [VarId; 3], p: [f64; 3], bound: LinExpr) -> Cone {
    let [dx, dy, dz] = diff(q, p);
    Cone::SecondOrder(vec![
        bound.clone() + 1.0,
        bound + (-1.0),
        dx * 2.0,
        dy * 2.0,
        dz * 2.0,
    ])
}

/// Build the convex subproblem at `it`.
pub fn assemble_subproblem(
    s: &Scenario,
    it: &Iterate,
    opts: &AssemblyOptions,
) -> Result<ConvexProgram, TransformError> {
    it.validate(s)?;
    let u = Units::for_scenario(s);
    let gamma = u.gamma(s);
    let n_slots = s.n_slots;
    let alice = u.pos(&s.alice_pos);
    let bob = u.pos(&s.bob_pos);
    let eve_c = u.pos(&s.eve.center);
    let d_e = match opts.eve_model {
        EveModel::Disc => s.eve.radius / u.len,
        EveModel::Point => 0.0,
    };
    let h = s.altitude_m / u.len;
    let start = u.pos(&s.uav_start);
    let end = u.pos(&s.uav_end);
    let step = s.max_step_m() * (1.0 - STEP_MARGIN) / u.len;
    let p_a_root = s.p_alice_max.sqrt();
    let p_u_root = s.p_uav_max.sqrt();

    // box bounds for variables the objective does not pull on
    let reach = n_slots as f64 * s.max_step_m() / u.len;
    let dist_to = |p: [f64; 3]| {
        let d = [(start[0] - p[0]), (start[1] - p[1]), (start[2] - p[2])];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let mu_cap = [
        2.0 * (dist_to(alice) + reach).powi(2) + 1.0,
        2.0 * (dist_to(bob) + reach).powi(2) + 1.0,
        2.0 * (dist_to(eve_c) + reach + d_e).powi(2) + 1.0,
    ];
    let ground_cap = dist_to(eve_c) + reach + 1.0;

    let mut p = ConvexProgram::new();
    p.objective_unit = u.bw;

    let mut vars = Vec::with_capacity(n_slots);
    for n in 0..n_slots {
        let slot = Some(n + 1);
        let branch = opts.strategy.pinned_branch(n);
        let q = [
            p.add_var(VarKind::Qx, slot, u.len),
            p.add_var(VarKind::Qy, slot, u.len),
            p.add_var(VarKind::Qz, slot, u.len),
        ];
        let v = SlotVars {
            q,
            b1: p.add_var(VarKind::B1, slot, u.bw),
            eta: p.add_var(VarKind::Eta, slot, u.bw),
            tau: p.add_var(VarKind::Tau, slot, u.bw),
            alpha: [
                p.add_var(VarKind::AlphaA, slot, 1.0),
                p.add_var(VarKind::AlphaB, slot, 1.0),
                p.add_var(VarKind::AlphaE, slot, 1.0),
            ],
            mu: [
                p.add_var(VarKind::MuA, slot, u.area()),
                p.add_var(VarKind::MuB, slot, u.area()),
                p.add_var(VarKind::MuE, slot, u.area()),
            ],
            theta: p.add_var(VarKind::Theta, slot, 1.0 / u.area()),
            r_ub: p.add_var(VarKind::Rub, slot, u.bw),
            r_ue: p.add_var(VarKind::Rue, slot, u.bw),
            r_b: p.add_var(VarKind::Rb, slot, u.bw),
            r_e: p.add_var(VarKind::Re, slot, u.bw),
            ground: match opts.eve_model {
                EveModel::Disc => Some(p.add_var(VarKind::GroundDist, slot, u.len)),
                EveModel::Point => None,
            },
            penalty: if branch.is_none() {
                Some(p.add_var(VarKind::Penalty, slot, u.bw * u.bw))
            } else {
                None
            },
        };
        vars.push(v);
    }
    let slack = match opts.qos {
        QosMode::Elastic { .. } => Some(p.add_var(VarKind::QosSlack, None, u.bw)),
        QosMode::Hard => None,
    };

    let mut objective = LinExpr::default();

    for (n, (v, x)) in vars.iter().zip(&it.slots).enumerate() {
        let slot = Some(n + 1);
        let branch = opts.strategy.pinned_branch(n);

        // trajectory
        p.push("altitude", slot, Cone::Zero(LinExpr::var(v.q[2]) + (-h)));
        if n + 1 == n_slots {
            p.push("endpoint", slot, Cone::Zero(LinExpr::var(v.q[0]) + (-end[0])));
            p.push("endpoint", slot, Cone::Zero(LinExpr::var(v.q[1]) + (-end[1])));
        }
        let mut cone = vec![LinExpr::constant(step)];
        if n == 0 {
            cone.extend(diff(v.q, start));
        } else {
            let prev = vars[n - 1].q;
            for k in 0..3 {
                cone.push(LinExpr::var(v.q[k]) - LinExpr::var(prev[k]));
            }
        }
        p.push("step", slot, Cone::SecondOrder(cone));

        // bandwidth
        p.push(
            "bandwidth",
            slot,
            Cone::Zero(LinExpr::var(v.b1) + LinExpr::var(v.eta) + LinExpr::var(v.tau) + (-1.0)),
        );
        p.push("floor", slot, Cone::NonNeg(LinExpr::var(v.b1) + (-BANDWIDTH_FLOOR)));
        match branch {
            Some(Branch::Bob) => {
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.tau)));
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.r_e)));
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.alpha[LINK_E])));
                p.push("floor", slot, Cone::NonNeg(LinExpr::var(v.eta) + (-BANDWIDTH_FLOOR)));
            }
            Some(Branch::Eve) => {
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.eta)));
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.r_b)));
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.alpha[LINK_B])));
                p.push("pin", slot, Cone::Zero(LinExpr::var(v.theta)));
                p.push("floor", slot, Cone::NonNeg(LinExpr::var(v.tau) + (-BANDWIDTH_FLOOR)));
            }
            None => {
                p.push("floor", slot, Cone::NonNeg(LinExpr::var(v.eta) + (-BANDWIDTH_FLOOR)));
                p.push("floor", slot, Cone::NonNeg(LinExpr::var(v.tau) + (-BANDWIDTH_FLOOR)));
            }
        }
        if opts.strategy == Strategy::FixedBandwidth {
            p.push("pin", slot, Cone::Zero(LinExpr::var(v.b1) + (-0.5)));
        }

        // power caps and sign constraints
        for (k, cap) in [(LINK_A, p_a_root), (LINK_B, p_u_root), (LINK_E, p_u_root)] {
            p.push("power", slot, Cone::NonNeg(LinExpr::var(v.alpha[k])));
            p.push("power", slot, Cone::NonNeg(LinExpr::constant(cap) - LinExpr::var(v.alpha[k])));
        }
        for r in [v.r_ub, v.r_ue, v.r_b, v.r_e, v.theta] {
            p.push("sign", slot, Cone::NonNeg(LinExpr::var(r)));
        }
        for k in [LINK_A, LINK_B, LINK_E] {
            p.push("sign", slot, Cone::NonNeg(LinExpr::var(v.mu[k])));
            p.push("box", slot, Cone::NonNeg(LinExpr::constant(mu_cap[k]) - LinExpr::var(v.mu[k])));
        }

        // squared-distance epigraphs
        p.push("distance_alice", slot, sq_dist_within(v.q, alice, LinExpr::var(v.mu[LINK_A])));
        p.push("distance_bob", slot, sq_dist_within(v.q, bob, LinExpr::var(v.mu[LINK_B])));
        let mut far_bound = LinExpr::var(v.mu[LINK_E]) + (-d_e * d_e);
        if let Some(g) = v.ground {
            p.push(
                "ground_distance",
                slot,
                Cone::SecondOrder(vec![
                    LinExpr::var(g),
                    LinExpr::var(v.q[0]) + (-eve_c[0]),
                    LinExpr::var(v.q[1]) + (-eve_c[1]),
                ]),
            );
            p.push("box", slot, Cone::NonNeg(LinExpr::constant(ground_cap) - LinExpr::var(g)));
            far_bound = far_bound - LinExpr::term(g, 2.0 * d_e);
        }
        p.push("distance_eve", slot, sq_dist_within(v.q, eve_c, far_bound));

        // rate hypographs with tangent SNR minorants
        let tangent = |k: usize| -> Result<LinExpr, TransformError> {
            let t = quad_over_lin_lower_bound(x.alpha[k], x.mu[k] / u.area())?;
            Ok(t.expr(v.alpha[k], v.mu[k]) * gamma)
        };
        p.push(
            "rate_uplink",
            slot,
            perspective_log_hypograph(LinExpr::var(v.b1), tangent(LINK_A)?, LinExpr::var(v.r_ub) + LinExpr::var(v.r_ue)),
        );
        if branch != Some(Branch::Eve) {
            p.push(
                "rate_bob",
                slot,
                perspective_log_hypograph(LinExpr::var(v.eta), tangent(LINK_B)?, LinExpr::var(v.r_b)),
            );
        }
        if branch != Some(Branch::Bob) {
            p.push(
                "rate_eve",
                slot,
                perspective_log_hypograph(LinExpr::var(v.tau), tangent(LINK_E)?, LinExpr::var(v.r_e)),
            );
        }

        // wiretap bound: α_b² ≤ θ · (linearized ‖q − s_e‖² + d_e² − 2 d_e D_G)
        if branch != Some(Branch::Eve) {
            let q_r = Position3::new(x.q.x / u.len, x.q.y / u.len, x.q.z / u.len);
            let lin = theta_rhs_linearization(&q_r, &Position3::new(eve_c[0], eve_c[1], eve_c[2]));
            let mut near = lin.expr(v.q) + d_e * d_e;
            if let Some(g) = v.ground {
                near = near - LinExpr::term(g, 2.0 * d_e);
            }
            p.push(
                "wiretap",
                slot,
                Cone::SecondOrder(vec![
                    LinExpr::var(v.theta) + near.clone(),
                    LinExpr::var(v.theta) - near,
                    LinExpr::term(v.alpha[LINK_B], 2.0),
                ]),
            );
            let eta_r = (x.eta / u.bw).max(BANDWIDTH_FLOOR);
            let t = secrecy_surrogate_term(x.theta * u.area(), eta_r, gamma)?;
            objective = objective + LinExpr::var(v.r_b) - t.expr(v.theta, v.eta);
        }

        // orthogonality penalty epigraph: ½((η/ψ)² + (τψ)²) ≤ s
        if let Some(pen) = v.penalty {
            let psi = x.psi;
            if !(psi > 0.0) {
                return Err(TransformError::DegenerateExpansion(format!("slot {}: psi = {psi}", n + 1)));
            }
            p.push("penalty", slot, Cone::NonNeg(LinExpr::var(pen)));
            p.push(
                "penalty",
                slot,
                Cone::SecondOrder(vec![
                    LinExpr::var(pen) + 0.5,
                    LinExpr::var(pen) + (-0.5),
                    LinExpr::term(v.eta, 1.0 / psi),
                    LinExpr::term(v.tau, psi),
                ]),
            );
            objective = objective - LinExpr::term(pen, x.lambda);
        }
    }

    // information causality on every prefix
    let mut bob_prefix = LinExpr::default();
    let mut eve_prefix = LinExpr::default();
    for (n, v) in vars.iter().enumerate() {
        bob_prefix = bob_prefix + LinExpr::var(v.r_ub) - LinExpr::var(v.r_b);
        eve_prefix = eve_prefix + LinExpr::var(v.r_ue) - LinExpr::var(v.r_e);
        p.push("causality_bob", Some(n + 1), Cone::NonNeg(bob_prefix.canonical()));
        p.push("causality_eve", Some(n + 1), Cone::NonNeg(eve_prefix.canonical()));
    }

    // accumulated Eve rate
    let mut eve_total = vars.iter().fold(LinExpr::default(), |acc, v| acc + LinExpr::var(v.r_e));
    eve_total.constant = -s.eve_qos_target / u.bw;
    match (opts.qos, slack) {
        (QosMode::Elastic { weight }, Some(sl)) => {
            p.push("qos_slack", None, Cone::NonNeg(LinExpr::var(sl)));
            p.push("qos", None, Cone::NonNeg(eve_total + LinExpr::var(sl)));
            objective = objective - LinExpr::term(sl, weight);
        }
        _ => p.push("qos", None, Cone::NonNeg(eve_total)),
    }

    p.objective = objective.canonical();
    p.validate()?;
    Ok(p)
}

/// Program-unit values that reproduce `it` exactly, with auxiliary
/// variables set to their tight values. Used to audit tangency.
pub fn iterate_point(s: &Scenario, it: &Iterate, program: &ConvexProgram) -> Vec<f64> {
    let u = Units::for_scenario(s);
    let mut x = vec![0.0; program.n_vars()];
    for (i, info) in program.vars.iter().enumerate() {
        let Some(slot) = info.slot else { continue };
        let sl = &it.slots[slot - 1];
        let si = match info.kind {
            VarKind::Qx => sl.q.x,
            VarKind::Qy => sl.q.y,
            VarKind::Qz => sl.q.z,
            VarKind::B1 => s.bandwidth_hz - sl.eta - sl.tau,
            VarKind::Eta => sl.eta,
            VarKind::Tau => sl.tau,
            VarKind::AlphaA => sl.alpha[LINK_A],
            VarKind::AlphaB => sl.alpha[LINK_B],
            VarKind::AlphaE => sl.alpha[LINK_E],
            VarKind::MuA => sl.mu[LINK_A],
            VarKind::MuB => sl.mu[LINK_B],
            VarKind::MuE => sl.mu[LINK_E],
            VarKind::Theta => sl.theta,
            VarKind::GroundDist => sl.q.ground_dist(&s.eve.center),
            VarKind::Penalty => {
                let (e, t) = (sl.eta / u.bw, sl.tau / u.bw);
                0.5 * ((e / sl.psi).powi(2) + (t * sl.psi).powi(2)) * u.bw * u.bw
            }
            _ => 0.0,
        };
        x[i] = si / info.unit;
    }
    x
}
