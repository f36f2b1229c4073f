//! Worked examples checked against independently computed values.

use std::sync::OnceLock;

use uav_secrecy::cli::{parse_scenario, DEFAULT_MISSION_TOML};
use uav_secrecy::eval::{eve_grid, feasibility_report, slot_leakage, sweep_uncertainty, REPORT_TOL};
use uav_secrecy::model::{
    closer_to_bob, eve_distance_bounds, perspective_rate, validate_scenario, wiretap_capacity, EveRegion, Position3,
    Scenario,
};
use uav_secrecy::sca::{
    init_iterate, run_sca, run_strategy, solve_subproblem, update_fixed_points, update_penalty_state,
    ClarabelBackend, IterationRecord, Phase, SolverOptions,
};
use uav_secrecy::transform::{assemble_subproblem, iterate_point, AssemblyOptions, SlotValues, Strategy};
use uav_secrecy::Solution;

fn mission() -> Scenario {
    parse_scenario(DEFAULT_MISSION_TOML).unwrap()
}

/// The default mission solved once and shared by the tests below.
fn default_run() -> &'static (Solution, Vec<IterationRecord>) {
    static RUN: OnceLock<(Solution, Vec<IterationRecord>)> = OnceLock::new();
    RUN.get_or_init(|| run_sca(&mission(), &SolverOptions::default()).expect("default mission solves"))
}

#[test]
fn rate_at_small_snr() {
    // 1e7 · ln(1 + 1e-3) to 40 digits
    let oracle = 9995.003330835331668;
    let r = perspective_rate(1e7, 1.0, 1e6, 1e10).unwrap();
    assert!((r - oracle).abs() <= 1e-12 * oracle, "{r}");
}

#[test]
fn near_distance_matches_sampled_circle() {
    let eve = EveRegion { center: Position3::new(0.0, 0.0, 0.0), radius: 300.0 };
    let q = Position3::new(1000.0, 0.0, 100.0);
    let (d_s, _) = eve_distance_bounds(&q, &eve);
    assert_eq!(d_s, 5.0e5);
    let sampled = (0..10_000)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / 10_000.0;
            q.dist_sq(&Position3::new(300.0 * phi.cos(), 300.0 * phi.sin(), 0.0))
        })
        .fold(f64::INFINITY, f64::min);
    assert!((d_s - sampled).abs() <= 1e-9 * sampled);
}

#[test]
fn straight_start_respects_the_step_limit() {
    let s = mission();
    assert!(validate_scenario(&s).is_empty());
    let it = init_iterate(&s, 1e-2, 1.0).unwrap();
    let mut prev = s.uav_start;
    for sl in &it.slots {
        let step = prev.dist(&sl.q);
        assert!((step - 8000.0 / 45.0).abs() < 1e-6, "{step}");
        assert!(step <= s.max_step_m());
        prev = sl.q;
    }
}

#[test]
fn penalty_step_uses_the_old_balance_point() {
    let s = mission();
    let b = s.bandwidth_hz;
    let mut it = init_iterate(&s, 1.0, 3.0).unwrap();
    for sl in &mut it.slots {
        sl.psi = 1.0;
    }
    let sol = uav_secrecy::transform::SubproblemSolution {
        status: uav_secrecy::transform::SolveStatus::Optimal,
        objective: 0.0,
        values: Vec::new(),
        slots: it
            .slots
            .iter()
            .map(|sl| SlotValues { q: sl.q, eta: 0.4 * b, tau: 0.1 * b, b1: 0.5 * b, ..Default::default() })
            .collect(),
        qos_slack: 0.0,
        max_violation: 0.0,
        diagnostics: String::new(),
    };
    let next = update_penalty_state(&s, &it, &sol, f64::INFINITY);
    for sl in &next.slots {
        // ½((0.4/1)² + (0.1·1)²) = 0.085 per unit step
        assert!((sl.lambda - (1.0 + 3.0 * 0.085)).abs() < 1e-12, "{}", sl.lambda);
        assert!((sl.psi - 2.0).abs() < 1e-12);
    }
}

#[test]
fn surrogates_touch_after_an_update() {
    // without a rate target the tight iterate point is feasible
    let s = mission().with_eve_qos_target(0.0);
    let opts = AssemblyOptions::default();
    let it = init_iterate(&s, 1e-2, 1.0).unwrap();
    let p = assemble_subproblem(&s, &it, &opts).unwrap();
    let sol = solve_subproblem(&p, &ClarabelBackend::default());
    assert!(sol.status.is_usable(), "{}", sol.diagnostics);
    let next = update_fixed_points(&s, &it, &sol).unwrap();
    let p2 = assemble_subproblem(&s, &next, &opts).unwrap();
    let x = iterate_point(&s, &next, &p2);
    // the new iterate sits on every tangent it was expanded around
    let viol = p2.max_violation(&x);
    assert!(viol < 1e-6, "{viol}");
}

#[test]
fn single_pinned_slot_solves() {
    let mut s = mission();
    s.n_slots = 1;
    s.flight_duration_s = s.slot_duration_s;
    s.uav_end = s.uav_start;
    s.max_speed_mps = 0.0;
    s.eve_qos_target = 0.0;
    let it = init_iterate(&s, 1e-2, 1.0).unwrap();
    let p = assemble_subproblem(&s, &it, &AssemblyOptions::default()).unwrap();
    let sol = solve_subproblem(&p, &ClarabelBackend::default());
    assert!(sol.status.is_usable(), "{}", sol.diagnostics);
    assert!(sol.objective.is_finite());
    assert!((sol.slots[0].q.x - s.uav_start.x).abs() < 1e-6);
}

#[test]
fn far_eavesdropper_without_target() {
    let mut s = mission().with_eve_qos_target(0.0);
    s.eve = EveRegion { center: Position3::new(2000.0, -6000.0, 0.0), radius: 100.0 };
    let (sol, log) = run_sca(&s, &SolverOptions::default()).unwrap();
    let main: Vec<f64> =
        log.iter().filter(|r| r.phase == Phase::Main).map(|r| r.surrogate_objective).collect();
    for w in main.windows(2) {
        assert!(w[1] >= w[0] - 1e-6 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
    for sl in &sol.slots {
        if sl.p_b > 0.0 {
            assert!(sl.rho);
        }
        assert_eq!(sl.p_e, 0.0);
        if sl.rho && sl.r_b > 0.0 {
            assert!(closer_to_bob(&sl.q, &s.bob_pos, &s.eve));
        }
    }
    assert!(sol.secrecy_total > 0.0);
}

#[test]
fn default_run_meets_target_and_bounds_surrogate() {
    let s = mission();
    let (sol, log) = default_run();
    assert!(sol.degraded.is_none(), "{:?}", sol.degraded);
    assert!(sol.eve_total >= s.eve_qos_target * (1.0 - 1e-4));
    assert!(feasibility_report(sol, &s, REPORT_TOL).pass);
    let last = log.last().unwrap().surrogate_objective;
    assert!(sol.secrecy_total >= last * (1.0 - 1e-6), "{} < {last}", sol.secrecy_total);
}

#[test]
fn leakage_sandwich_on_default_run() {
    let s = mission();
    let (sol, _) = default_run();
    let grid = eve_grid(&s, 16);
    for sl in sol.slots.iter().filter(|sl| sl.rho && sl.p_b > 0.0) {
        if sl.q.ground_dist(&s.eve.center) < s.eve.radius {
            continue;
        }
        let bound = wiretap_capacity(&sl.q, sl.rho, sl.b2, sl.p_b, &s).unwrap();
        for p in &grid {
            assert!(slot_leakage(sl, p, &s) <= bound + 1e-9);
        }
    }
}

#[test]
fn baselines_pin_their_resources() {
    let s = mission();
    let opts = SolverOptions::default();
    let (fb, _) = run_strategy(&s, Strategy::FixedBandwidth, &opts, None).unwrap();
    assert!(fb.slots.iter().all(|sl| sl.b1 == 0.5 * s.bandwidth_hz));
    assert!(feasibility_report(&fb, &s, REPORT_TOL).pass);
    let (ft, _) = run_strategy(&s, Strategy::FixedTimeslot, &opts, None).unwrap();
    assert_eq!(ft.slots.iter().filter(|sl| sl.rho).count(), 23);
    let (joint, _) = default_run();
    assert!(fb.secrecy_total <= joint.secrecy_total * (1.0 + 1e-6));
    assert!(ft.secrecy_total <= joint.secrecy_total * (1.0 + 1e-6));
}

#[test]
fn coarse_sweep_is_non_increasing() {
    let s = mission();
    let rows = sweep_uncertainty(&s, &[0.0, 150.0, 300.0], &[Strategy::Joint], &SolverOptions::default()).unwrap();
    assert_eq!(rows.len(), 3);
    let v: Vec<f64> = rows.iter().map(|r| r.secrecy_total.expect("cell solved")).collect();
    for w in v.windows(2) {
        assert!(w[1] <= w[0] * 1.01, "{v:?}");
    }
}
