//! Physical scenario, exact channel/capacity formulas and worst-case
//! eavesdropper geometry.
//!
//! Everything here works in SI units with rates in nat/s. Nothing in this
//! module knows about surrogates or solvers; the evaluation code relies on
//! that to audit optimizer output independently.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::schedule::Solution;

/// A point in the mission frame, meters. `z` is altitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dist_sq(&self, other: &Position3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist(&self, other: &Position3) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Distance between the ground projections of the two points.
    pub fn ground_dist(&self, other: &Position3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Linear interpolation, `t = 0` gives `self`.
    pub fn lerp(&self, other: &Position3, t: f64) -> Position3 {
        Position3::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
            self.z + t * (other.z - self.z),
        )
    }
}

/// Ground disc known to contain the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveRegion {
    pub center: Position3,
    pub radius: f64,
}

impl EveRegion {
    pub fn point(center: Position3) -> Self {
        Self { center, radius: 0.0 }
    }
}

/// Mission and link-budget parameters, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub alice_pos: Position3,
    pub bob_pos: Position3,
    pub eve: EveRegion,
    pub uav_start: Position3,
    pub uav_end: Position3,
    pub altitude_m: f64,
    pub flight_duration_s: f64,
    pub slot_duration_s: f64,
    pub n_slots: usize,
    pub max_speed_mps: f64,
    pub bandwidth_hz: f64,
    /// Channel power gain at 1 m, linear.
    pub ref_gain: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    pub p_alice_max: f64,
    pub p_uav_max: f64,
    /// Minimum accumulated (summed over slots) Eve rate, nat/s.
    pub eve_qos_target: f64,
}

impl Scenario {
    /// Largest horizontal displacement per slot, `T_s * V_max`.
    pub fn max_step_m(&self) -> f64 {
        self.slot_duration_s * self.max_speed_mps
    }

    /// Noise-normalized reference gain `γ0 / σ²`, Hz·m²/W.
    pub fn norm_gain(&self) -> f64 {
        self.ref_gain / self.noise_psd
    }

    pub fn with_eve_radius(&self, radius: f64) -> Scenario {
        let mut s = self.clone();
        s.eve.radius = radius;
        s
    }

    pub fn with_eve_qos_target(&self, target: f64) -> Scenario {
        let mut s = self.clone();
        s.eve_qos_target = target;
        s
    }
}

/// One violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub relation: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.relation)
    }
}

/// Relative slack accepted on the `T = N * T_s` identity.
const DURATION_REL_TOL: f64 = 1e-12;

pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |field: &'static str, relation: String| out.push(Violation { field, relation });

    for (field, p) in [
        ("alice_pos", &s.alice_pos),
        ("bob_pos", &s.bob_pos),
        ("eve.center", &s.eve.center),
        ("uav_start", &s.uav_start),
        ("uav_end", &s.uav_end),
    ] {
        if !p.is_finite() {
            push(field, "coordinates must be finite".into());
        } else if p.z < 0.0 {
            push(field, format!("altitude {} < 0", p.z));
        }
    }
    if s.eve.center.z != 0.0 {
        push("eve.center", format!("altitude {} ≠ 0", s.eve.center.z));
    }
    if !(s.eve.radius >= 0.0 && s.eve.radius.is_finite()) {
        push("eve.radius", format!("{} is not a finite value ≥ 0", s.eve.radius));
    }
    if s.n_slots == 0 {
        push("n_slots", "N must be ≥ 1".into());
    }
    if !(s.slot_duration_s > 0.0) {
        push("slot_duration_s", format!("T_s = {} ≤ 0", s.slot_duration_s));
    }
    let expected_t = s.n_slots as f64 * s.slot_duration_s;
    if (s.flight_duration_s - expected_t).abs() > DURATION_REL_TOL * expected_t.abs().max(1.0) {
        push(
            "flight_duration_s",
            format!("T ≠ N·T_s ({} ≠ {} · {})", s.flight_duration_s, s.n_slots, s.slot_duration_s),
        );
    }
    if !(s.max_speed_mps >= 0.0 && s.max_speed_mps.is_finite()) {
        push("max_speed_mps", format!("V_max = {} is not finite and ≥ 0", s.max_speed_mps));
    }
    if !(s.altitude_m > 0.0 && s.altitude_m.is_finite()) {
        push("altitude_m", format!("H = {} ≤ 0", s.altitude_m));
    }
    if s.uav_start.z != s.altitude_m {
        push("uav_start", format!("s_I.z = {} ≠ H = {}", s.uav_start.z, s.altitude_m));
    }
    if s.uav_end.z != s.altitude_m {
        push("uav_end", format!("s_F.z = {} ≠ H = {}", s.uav_end.z, s.altitude_m));
    }
    for (field, v) in [
        ("p_alice_max", s.p_alice_max),
        ("p_uav_max", s.p_uav_max),
        ("bandwidth_hz", s.bandwidth_hz),
        ("ref_gain", s.ref_gain),
        ("noise_psd", s.noise_psd),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            push(field, format!("{v} must be finite and > 0"));
        }
    }
    if !(s.eve_qos_target >= 0.0 && s.eve_qos_target.is_finite()) {
        push("eve_qos_target", format!("R_E = {} must be finite and ≥ 0", s.eve_qos_target));
    }
    let span = s.uav_start.dist(&s.uav_end);
    let reach = s.n_slots as f64 * s.max_step_m();
    if span > reach * (1.0 + 1e-12) {
        push("uav_end", format!("‖s_F − s_I‖ = {span} > N·D = {reach}"));
    }
    for (field, p) in [("alice_pos", &s.alice_pos), ("bob_pos", &s.bob_pos)] {
        if p.z >= s.altitude_m {
            push(field, format!("ground node altitude {} reaches the flight altitude", p.z));
        }
    }
    out
}

/// Line-of-sight power gain `γ0 / ‖q − s‖²`.
pub fn channel_gain(q: &Position3, s: &Position3, ref_gain: f64) -> Result<f64, ModelError> {
    let d2 = q.dist_sq(s);
    if d2 <= 0.0 {
        return Err(ModelError::CoincidentPositions);
    }
    Ok(ref_gain / d2)
}

/// Smallest and largest squared UAV–Eve distance `(d_s, d_w)` over the
/// uncertainty circle around `eve.center`.
pub fn eve_distance_bounds(q: &Position3, eve: &EveRegion) -> (f64, f64) {
    let dg = q.ground_dist(&eve.center);
    let dz = q.z - eve.center.z;
    let near = dg - eve.radius;
    let far = dg + eve.radius;
    (near * near + dz * dz, far * far + dz * dz)
}

/// Bandwidth-scaled Shannon rate `bw · ln(1 + γ·p / (bw·d²))`, nat/s.
///
/// Extends continuously to `0` at `bw = 0`.
pub fn perspective_rate(bw: f64, power: f64, dist_sq: f64, norm_gain: f64) -> Result<f64, ModelError> {
    if !(dist_sq > 0.0) {
        return Err(ModelError::NonPositiveDistance(dist_sq));
    }
    if bw < 0.0 {
        return Err(ModelError::Negative { name: "bandwidth", value: bw });
    }
    if power < 0.0 {
        return Err(ModelError::Negative { name: "power", value: power });
    }
    if bw == 0.0 {
        return Ok(0.0);
    }
    Ok(bw * (norm_gain * power / (bw * dist_sq)).ln_1p())
}

/// `[r_b − c_wiretap]⁺`.
pub fn per_slot_secrecy_rate(r_b: f64, c_wiretap: f64) -> f64 {
    (r_b - c_wiretap).max(0.0)
}

/// Whether the UAV is strictly closer to Bob than to the worst-case Eve
/// position. Ties count as not closer.
pub fn closer_to_bob(q: &Position3, bob: &Position3, eve: &EveRegion) -> bool {
    let (d_s, _) = eve_distance_bounds(q, eve);
    q.dist_sq(bob) < d_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotMetrics {
    pub bob_capacity: f64,
    pub wiretap_capacity: f64,
    pub secrecy_rate: f64,
    pub eve_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatedMetrics {
    pub secrecy_total: f64,
    pub eve_total: f64,
    pub per_slot: Vec<SlotMetrics>,
}

/// Wiretap capacity of the confidential stream at the worst-case Eve
/// position; zero in slots that do not serve Bob.
pub fn wiretap_capacity(
    q: &Position3,
    rho: bool,
    b2: f64,
    p_b: f64,
    s: &Scenario,
) -> Result<f64, ModelError> {
    if !rho {
        return Ok(0.0);
    }
    let (d_s, _) = eve_distance_bounds(q, &s.eve);
    perspective_rate(b2, p_b, d_s, s.norm_gain())
}

/// Accumulated secrecy and Eve rates of a schedule under the exact
/// capacities.
pub fn accumulated_metrics(sol: &Solution, s: &Scenario) -> Result<AccumulatedMetrics, ModelError> {
    if sol.slots.len() != s.n_slots {
        return Err(ModelError::SlotCountMismatch { expected: s.n_slots, got: sol.slots.len() });
    }
    let gamma = s.norm_gain();
    let mut per_slot = Vec::with_capacity(sol.slots.len());
    for slot in &sol.slots {
        let bob_capacity = if slot.rho {
            perspective_rate(slot.b2, slot.p_b, slot.q.dist_sq(&s.bob_pos), gamma)?
        } else {
            0.0
        };
        let wiretap = wiretap_capacity(&slot.q, slot.rho, slot.b2, slot.p_b, s)?;
        per_slot.push(SlotMetrics {
            bob_capacity,
            wiretap_capacity: wiretap,
            secrecy_rate: per_slot_secrecy_rate(slot.r_b, wiretap),
            eve_rate: slot.r_e,
        });
    }
    Ok(AccumulatedMetrics {
        secrecy_total: per_slot.iter().map(|m| m.secrecy_rate).sum(),
        eve_total: per_slot.iter().map(|m| m.eve_rate).sum(),
        per_slot,
    })
}
