use serde::{Deserialize, Serialize};

use crate::model::{eve_distance_bounds, Position3, Scenario};
use crate::schedule::{SlotSchedule, Solution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveScan {
    /// Largest confidential-stream leakage over the sampled positions,
    /// nat/s summed over slots.
    pub max_leakage: f64,
    pub argmax: Position3,
    /// Σ of per-slot wiretap capacities at the nearest disc point.
    pub bound: f64,
    /// Whether every active slot keeps its ground distance ≥ `d_e`, the
    /// condition under which `bound` must dominate.
    pub bound_applies: bool,
}

/// Polar grid over Eve's disc: the center plus `grid_res` rings of
/// `4·grid_res` points each, the outermost ring on the boundary.
pub fn eve_grid(s: &Scenario, grid_res: usize) -> Vec<Position3> {
    let c = s.eve.center;
    let mut pts = vec![c];
    if s.eve.radius == 0.0 {
        return pts;
    }
    let n_ang = 4 * grid_res;
    for i in 1..=grid_res {
        let r = s.eve.radius * i as f64 / grid_res as f64;
        for k in 0..n_ang {
            let phi = std::f64::consts::TAU * k as f64 / n_ang as f64;
            pts.push(Position3::new(c.x + r * phi.cos(), c.y + r * phi.sin(), c.z));
        }
    }
    pts
}

/// Confidential-stream rate decodable at `p` in one slot.
pub fn slot_leakage(sl: &SlotSchedule, p: &Position3, s: &Scenario) -> f64 {
    if !sl.rho || sl.b2 <= 0.0 {
        return 0.0;
    }
    sl.b2 * (s.norm_gain() * sl.p_b / (sl.b2 * sl.q.dist_sq(p))).ln_1p()
}

/// Worst-case leakage to an eavesdropper anywhere in the disc, sampled on
/// [`eve_grid`].
pub fn worst_case_eve_scan(sol: &Solution, s: &Scenario, grid_res: usize) -> EveScan {
    let grid_res = grid_res.max(8);
    let gamma = s.norm_gain();
    let mut best = (f64::NEG_INFINITY, s.eve.center);
    for p in eve_grid(s, grid_res) {
        let total: f64 = sol.slots.iter().map(|sl| slot_leakage(sl, &p, s)).sum();
        if total > best.0 {
            best = (total, p);
        }
    }
    let mut bound = 0.0;
    let mut bound_applies = true;
    for sl in sol.slots.iter().filter(|sl| sl.rho && sl.p_b > 0.0 && sl.b2 > 0.0) {
        let (d_s, _) = eve_distance_bounds(&sl.q, &s.eve);
        bound += sl.b2 * (gamma * sl.p_b / (sl.b2 * d_s)).ln_1p();
        if sl.q.ground_dist(&s.eve.center) < s.eve.radius {
            bound_applies = false;
        }
    }
    EveScan { max_leakage: best.0, argmax: best.1, bound, bound_applies }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{default_scenario, zero_solution};

    fn one_active(s: &Scenario, idx: usize) -> Solution {
        let mut sol = zero_solution(s);
        let sl = &mut sol.slots[idx];
        sl.rho = true;
        sl.b1 = 0.5 * s.bandwidth_hz;
        sl.b2 = 0.5 * s.bandwidth_hz;
        sl.p_b = s.p_uav_max;
        sol
    }

    #[test]
    fn grid_cardinality() {
        let s = default_scenario();
        assert_eq!(eve_grid(&s, 8).len(), 1 + 8 * 32);
        assert_eq!(eve_grid(&s.with_eve_radius(0.0), 8).len(), 1);
    }

    #[test]
    fn point_disc_scans_the_center() {
        let s = default_scenario().with_eve_radius(0.0);
        let sol = one_active(&s, 10);
        let scan = worst_case_eve_scan(&sol, &s, 8);
        assert_eq!(scan.argmax, s.eve.center);
        assert_eq!(scan.max_leakage, slot_leakage(&sol.slots[10], &s.eve.center, &s));
        assert!((scan.max_leakage - scan.bound).abs() <= 1e-9 * scan.bound);
    }

    #[test]
    fn argmax_on_near_boundary() {
        let s = default_scenario();
        // slot 45 sits at s_F, far to the upper right of the disc
        let sol = one_active(&s, 44);
        let scan = worst_case_eve_scan(&sol, &s, 16);
        let c = s.eve.center;
        assert!((scan.argmax.ground_dist(&c) - s.eve.radius).abs() < 1e-9);
        let q = sol.slots[44].q;
        let toward = ((q.x - c.x) / q.ground_dist(&c), (q.y - c.y) / q.ground_dist(&c));
        let got = ((scan.argmax.x - c.x) / s.eve.radius, (scan.argmax.y - c.y) / s.eve.radius);
        assert!((toward.0 - got.0).hypot(toward.1 - got.1) < 0.2);
        assert!(scan.bound_applies);
        assert!(scan.max_leakage <= scan.bound * (1.0 + 1e-12));
    }

    #[test]
    fn inactive_schedule_leaks_nothing() {
        let s = default_scenario();
        let scan = worst_case_eve_scan(&zero_solution(&s), &s, 8);
        assert_eq!((scan.max_leakage, scan.bound), (0.0, 0.0));
    }
}
