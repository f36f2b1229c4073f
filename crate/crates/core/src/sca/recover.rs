use crate::eval::{feasibility_report, REPORT_TOL};
use crate::model::{accumulated_metrics, eve_distance_bounds, Position3, Scenario};
use crate::schedule::{RunStatus, SlotSchedule, Solution};
use crate::transform::{Strategy, SubproblemSolution};

/// Headroom on trimmed powers so the trimmed link still carries its rate
/// after round-off.
const TRIM_HEADROOM: f64 = 1e-9;

/// Split `total` into two parts that sum to it exactly in floating point,
/// the first as close to `first` as possible.
pub fn exact_split(first: f64, total: f64) -> (f64, f64) {
    let first = first.clamp(0.0, total);
    if first <= 0.5 * total {
        let larger = total - first;
        (total - larger, larger)
    } else {
        let larger = first;
        let smaller = total - larger;
        (total - smaller, smaller)
    }
}

/// Least power carrying `rate` over `bw` at squared distance `d2`, capped
/// at `p_max`, together with the rate that power actually carries.
fn fit_power(rate: f64, bw: f64, d2: f64, gamma: f64, p_max: f64) -> (f64, f64) {
    if rate <= 0.0 || bw <= 0.0 {
        return (0.0, 0.0);
    }
    let need = (rate / bw).exp_m1() * bw * d2 / gamma * (1.0 + TRIM_HEADROOM);
    if need <= p_max {
        (need, rate)
    } else {
        (p_max, bw * (gamma * p_max / (bw * d2)).ln_1p())
    }
}

/// Stop serving Eve in slots whose rate the QoS target does not need,
/// smallest rates first. Dropping Eve data only loosens causality, and the
/// saved power buys nothing else, so the relaxed solver has no reason to
/// zero these rates itself.
fn drop_surplus_eve_service(slots: &mut [SlotSchedule], target: f64) {
    let mut order: Vec<usize> = (0..slots.len()).filter(|&i| !slots[i].rho && slots[i].r_e > 0.0).collect();
    order.sort_by(|&a, &b| slots[a].r_e.total_cmp(&slots[b].r_e).then(a.cmp(&b)));
    // rate still delivered if order[k..] are kept, summed without
    // cancellation
    let mut kept = vec![0.0; order.len() + 1];
    for k in (0..order.len()).rev() {
        kept[k] = kept[k + 1] + slots[order[k]].r_e;
    }
    for (k, &i) in order.iter().enumerate() {
        if kept[k + 1] < target {
            break;
        }
        slots[i].r_e = 0.0;
        slots[i].p_e = 0.0;
    }
}

/// Turn a relaxed subproblem solution into a binary schedule.
///
/// `ρ_n = 1` iff `η_n ≥ τ_n`; the downlink gets `b₂ = B − b₁`. Rates of the
/// unused branch are dropped. Each power is set to the least value that
/// carries its rate at the recovered position; where that exceeds the cap,
/// the power is capped and the rate cut to what the cap carries. Eve
/// service beyond the QoS target is then dropped slot by slot. The result
/// is audited against the exact model and flagged `degraded` if any family
/// fails.
pub fn recover_schedule(
    sol: &SubproblemSolution,
    s: &Scenario,
    strategy: Strategy,
    iterations: usize,
    status: RunStatus,
) -> Solution {
    let b = s.bandwidth_hz;
    let gamma = s.norm_gain();
    let n_slots = sol.slots.len();
    let mut slots: Vec<SlotSchedule> = sol
        .slots
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut q = Position3::new(v.q.x, v.q.y, s.altitude_m);
            if i + 1 == n_slots {
                q = s.uav_end;
            }
            let rho = v.eta >= v.tau;
            let uplink = if strategy == Strategy::FixedBandwidth { 0.5 * b } else { v.b1 };
            let (b1, b2) = exact_split(uplink, b);
            let (mut r_ub, mut r_ue) = (v.r_ub.max(0.0), v.r_ue.max(0.0));
            let (mut r_b, mut r_e) = if rho { (v.r_b.max(0.0), 0.0) } else { (0.0, v.r_e.max(0.0)) };

            let d_a = q.dist_sq(&s.alice_pos);
            let (p_a, cap) = fit_power(r_ub + r_ue, b1, d_a, gamma, s.p_alice_max);
            if r_ub + r_ue > cap {
                let k = cap / (r_ub + r_ue);
                r_ub *= k;
                r_ue *= k;
            }
            let (p_b, p_e) = if rho {
                let (p, cap) = fit_power(r_b, b2, q.dist_sq(&s.bob_pos), gamma, s.p_uav_max);
                r_b = r_b.min(cap);
                (p, 0.0)
            } else {
                let (_, d_w) = eve_distance_bounds(&q, &s.eve);
                let (p, cap) = fit_power(r_e, b2, d_w, gamma, s.p_uav_max);
                r_e = r_e.min(cap);
                (0.0, p)
            };
            SlotSchedule { q, b1, b2, rho, p_a, p_b, p_e, r_ub, r_ue, r_b, r_e }
        })
        .collect();
    drop_surplus_eve_service(&mut slots, s.eve_qos_target);
    let mut out = Solution {
        slots,
        secrecy_total: 0.0,
        eve_total: 0.0,
        surrogate_objective: sol.objective,
        status,
        degraded: None,
        iterations,
    };
    match accumulated_metrics(&out, s) {
        Ok(m) => {
            out.secrecy_total = m.secrecy_total;
            out.eve_total = m.eve_total;
        }
        Err(e) => out.degraded = Some(e.to_string()),
    }
    if out.degraded.is_none() {
        let report = feasibility_report(&out, s, REPORT_TOL);
        if !report.pass {
            out.degraded = Some(report.summary());
        }
    }
    out
}
