use serde::{Deserialize, Serialize};

use crate::model::{eve_distance_bounds, per_slot_secrecy_rate, Scenario};
use crate::schedule::{SlotSchedule, Solution};

/// Default relative tolerance for auditing optimizer output.
pub const REPORT_TOL: f64 = 1e-6;

/// Worst residual of one constraint family. Positive values are
/// violations; `relative` is `residual / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidual {
    pub family: String,
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
    /// 1-based slot of the worst item, if slot-indexed.
    pub worst_slot: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub families: Vec<FamilyResidual>,
    pub pass: bool,
    pub tol: f64,
}

impl FeasibilityReport {
    pub fn family(&self, name: &str) -> Option<&FamilyResidual> {
        self.families.iter().find(|f| f.family == name)
    }

    /// Failing families, or "feasible".
    pub fn summary(&self) -> String {
        let bad: Vec<String> = self
            .families
            .iter()
            .filter(|f| !(f.relative <= self.tol))
            .map(|f| match f.worst_slot {
                Some(n) => format!("{} residual {:e} at slot {n}", f.family, f.residual),
                None => format!("{} residual {:e}", f.family, f.residual),
            })
            .collect();
        if bad.is_empty() {
            "feasible".into()
        } else {
            bad.join("; ")
        }
    }
}

struct Family {
    name: &'static str,
    scale: f64,
    worst: Option<(f64, Option<usize>)>,
}

impl Family {
    fn new(name: &'static str, scale: f64) -> Self {
        Self { name, scale, worst: None }
    }

    fn check(&mut self, residual: f64, slot: Option<usize>) {
        // NaN residuals must win so they are never reported as passing
        let replace = match self.worst {
            None => true,
            Some((w, _)) => residual.is_nan() || residual > w,
        };
        if replace && !self.worst.is_some_and(|(w, _)| w.is_nan()) {
            self.worst = Some((residual, slot));
        }
    }

    fn finish(self) -> FamilyResidual {
        let (residual, worst_slot) = self.worst.unwrap_or((0.0, None));
        FamilyResidual {
            family: self.name.into(),
            residual,
            scale: self.scale,
            relative: residual / self.scale,
            worst_slot,
        }
    }
}

fn capacity(bw: f64, p: f64, d2: f64, gamma: f64) -> f64 {
    if bw <= 0.0 {
        0.0
    } else {
        bw * (gamma * p / (bw * d2)).ln_1p()
    }
}

/// Audit a schedule against every constraint of the original problem with
/// the exact capacities and worst-case Eve distances.
pub fn feasibility_report(sol: &Solution, s: &Scenario, tol: f64) -> FeasibilityReport {
    let b = s.bandwidth_hz;
    let gamma = s.norm_gain();
    let d = s.max_step_m();
    let mut slots_fam = Family::new("slot_count", 1.0);
    slots_fam.check((sol.slots.len() as f64 - s.n_slots as f64).abs(), None);

    let mut traj = Family::new("trajectory", d.max(1.0));
    let mut bw = Family::new("bandwidth", b);
    let mut power_a = Family::new("power_alice", s.p_alice_max);
    let mut power_u = Family::new("power_uav", s.p_uav_max);
    let mut uplink = Family::new("uplink_rate", b);
    let mut rel_bob = Family::new("reliability_bob", b);
    let mut rel_eve = Family::new("reliability_eve", b);
    let mut caus_bob = Family::new("causality_bob", b);
    let mut caus_eve = Family::new("causality_eve", b);
    let qos_scale = if s.eve_qos_target > 0.0 { s.eve_qos_target } else { b };
    let mut qos = Family::new("eve_qos", qos_scale);

    let mut prev = s.uav_start;
    let (mut sum_ub, mut sum_ue, mut sum_b, mut sum_e) = (0.0, 0.0, 0.0, 0.0);
    for (i, sl) in sol.slots.iter().enumerate() {
        let n = Some(i + 1);
        let SlotSchedule { q, b1, b2, rho, p_a, p_b, p_e, r_ub, r_ue, r_b, r_e } = *sl;

        traj.check(q.dist(&prev) - d, n);
        traj.check((q.z - s.altitude_m).abs(), n);
        prev = q;

        bw.check((b1 + b2 - b).abs(), n);
        bw.check(-b1, n);
        bw.check(-b2, n);

        power_a.check(p_a - s.p_alice_max, n);
        power_a.check(-p_a, n);
        for p in [p_b, p_e] {
            power_u.check(p - s.p_uav_max, n);
            power_u.check(-p, n);
        }

        let c_au = capacity(b1, p_a, q.dist_sq(&s.alice_pos), gamma);
        uplink.check(r_ub + r_ue - c_au, n);
        uplink.check(-r_ub, n);
        uplink.check(-r_ue, n);

        let c_ub = if rho { capacity(b2, p_b, q.dist_sq(&s.bob_pos), gamma) } else { 0.0 };
        rel_bob.check(r_b - c_ub, n);
        rel_bob.check(-r_b, n);
        let (_, d_w) = eve_distance_bounds(&q, &s.eve);
        let c_ue = if rho { 0.0 } else { capacity(b2, p_e, d_w, gamma) };
        rel_eve.check(r_e - c_ue, n);
        rel_eve.check(-r_e, n);

        sum_ub += r_ub;
        sum_ue += r_ue;
        sum_b += r_b;
        sum_e += r_e;
        caus_bob.check(sum_b - sum_ub, n);
        caus_eve.check(sum_e - sum_ue, n);
    }
    if let Some(last) = sol.slots.last() {
        traj.check(last.q.dist(&s.uav_end), Some(sol.slots.len()));
    }
    qos.check(s.eve_qos_target - sum_e, None);

    let families: Vec<FamilyResidual> = [
        slots_fam, traj, bw, power_a, power_u, uplink, rel_bob, rel_eve, caus_bob, caus_eve, qos,
    ]
    .into_iter()
    .map(Family::finish)
    .collect();
    let pass = families.iter().all(|f| f.relative <= tol);
    FeasibilityReport { families, pass, tol }
}

/// `Σ_n [R_b,n − C_wiretap,n]⁺` with the wiretap capacity taken at the
/// nearest point of Eve's disc.
pub fn exact_secrecy_objective(sol: &Solution, s: &Scenario) -> f64 {
    let gamma = s.norm_gain();
    sol.slots
        .iter()
        .filter(|sl| sl.rho)
        .map(|sl| {
            let (d_s, _) = eve_distance_bounds(&sl.q, &s.eve);
            per_slot_secrecy_rate(sl.r_b, capacity(sl.b2, sl.p_b, d_s, gamma))
        })
        .sum()
}
