use morphwing::aero::{eval_coefficients, station_deflection, station_flows_body};
use morphwing::airframe::{rotation_from_euler, to_convention, Convention, WingPoses};
use morphwing::controls::{ControlId, ControlVector};
use morphwing::sim::{simulate, IntegratorOptions};
use morphwing::trim::*;
use morphwing::Aircraft;

fn level_trim(aircraft: &Aircraft) -> TrimPoint {
    solve_trim(aircraft, &TrimTarget::pitch(0.0, 25.0), &ControlVector::default()).unwrap()
}

/// Drag of every strip and fuselage segment, summed directly from the
/// coefficient model at the flow each one sees in level flight.
fn summed_drag(aircraft: &Aircraft, point: &TrimPoint) -> f64 {
    let state = point.target.state();
    let wings = WingPoses::from_controls(&point.controls, &Default::default());
    let rho = aircraft.config.air_density;
    let mut drag = 0.0;
    for (st, flow) in aircraft.stations.iter().zip(station_flows_body(aircraft, &state, &wings)) {
        let (delta, eff) = station_deflection(st, &point.controls);
        let c = eval_coefficients(&aircraft.models[st.table], flow.phi_eff, delta, eff).unwrap();
        drag += rho * flow.airspeed.powi(2) * st.semichord * st.width * c.cd;
    }
    // straight flight along every fuselage axis: pure axial drag
    let speed = state.vel.norm();
    for strip in &aircraft.strips {
        drag += rho * speed * speed * strip.radius * strip.width * strip.cd0;
    }
    drag
}

#[test]
fn level_thrust_balances_summed_drag() {
    let aircraft = Aircraft::case_study();
    let p = level_trim(&aircraft);
    assert!(p.converged && p.residual_norm < 1e-8);
    let along = aircraft.config.thrust.direction[0];
    let drag = summed_drag(&aircraft, &p);
    assert!(
        (p.controls.thrust * along - drag).abs() < 1e-6,
        "thrust {} vs drag {drag}",
        p.controls.thrust
    );
}

#[test]
fn level_trim_holds_in_simulation() {
    let aircraft = Aircraft::case_study();
    let p = level_trim(&aircraft);
    let z0 = p.target.state();
    let traj = simulate(&aircraft, &p.controls, &z0, (0.0, 15.0), &IntegratorOptions::default()).unwrap();
    let r0 = rotation_from_euler(&z0.euler);
    for s in &traj.states {
        let r = rotation_from_euler(&s.euler);
        let angle = nalgebra::Rotation3::from_matrix_unchecked(r0.transpose() * r).angle();
        assert!(angle < 0.05, "drift {angle}");
    }
    let end = to_convention(traj.last(), Convention::Zyx321).unwrap();
    assert!((end.vel - z0.vel).norm() < 0.05 * 25.0);
}

#[test]
fn pitch_envelope_ends_on_elevator_limit() {
    let aircraft = Aircraft::case_study();
    let targets: Vec<TrimTarget> = (0..=100).map(|k| TrimTarget::pitch(0.01 * k as f64, 25.0)).collect();
    let path = continue_path(&aircraft, &targets, &ControlVector::default()).unwrap();
    let last = path.last().unwrap();
    assert!(!last.converged, "reached alpha = {} without a limit", last.target.alpha);
    assert_eq!(last.active_limits, vec![ControlId::Elevator]);
    for p in &path[..path.len() - 1] {
        assert!(p.converged && p.active_limits.is_empty());
    }
    // trim elevator moves steadily toward its lower limit as alpha grows
    let elevators: Vec<f64> = path[..path.len() - 1].iter().map(|p| p.controls.elevator).collect();
    assert!(elevators.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn there_and_back_returns_to_start() {
    let aircraft = Aircraft::case_study();
    let make = |a: f64| TrimTarget::general(a, 0.0, 25.0, 0.3, ConstraintPolicy::InboardFrozen, MorphChannel::Dihedral);
    let mut targets: Vec<TrimTarget> = (0..=30).map(|k| make(0.01 * k as f64)).collect();
    targets.extend((0..30).rev().map(|k| make(0.01 * k as f64)));
    let path = continue_path(&aircraft, &targets, &ControlVector::default()).unwrap();
    assert_eq!(path.len(), targets.len());
    let (first, last) = (&path[0].controls, &path.last().unwrap().controls);
    for (a, b) in first.values().iter().zip(last.values()) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

#[test]
fn sideslip_mirror_gives_mirrored_controls() {
    let aircraft = Aircraft::case_study();
    for policy in [ConstraintPolicy::InboardFrozen, ConstraintPolicy::OutboardFrozen] {
        let t = TrimTarget::general(0.1, 0.12, 25.0, 0.2, policy, MorphChannel::Dihedral);
        let a = solve_from_rest(&aircraft, &t).unwrap();
        let b = solve_from_rest(&aircraft, &t.mirrored()).unwrap();
        let m = a.controls.mirrored();
        for (x, y) in m.values().iter().zip(b.controls.values()) {
            assert!((x - y).abs() < 1e-7, "{policy:?}: {x} vs {y}");
        }
    }
}

#[test]
fn policies_agree_without_sideslip() {
    let aircraft = Aircraft::case_study();
    for alpha in [0.0, 0.1, 0.2] {
        let make = |policy| TrimTarget::general(alpha, 0.0, 25.0, 0.3, policy, MorphChannel::Dihedral);
        let a = solve_from_rest(&aircraft, &make(ConstraintPolicy::InboardFrozen)).unwrap();
        let b = solve_from_rest(&aircraft, &make(ConstraintPolicy::OutboardFrozen)).unwrap();
        assert_eq!(a.controls.values(), b.controls.values());
    }
}

#[test]
fn trim_space_is_mirror_symmetric() {
    let aircraft = Aircraft::case_study();
    let opts = SweepOptions {
        alpha_range: (-0.1, 0.3),
        beta_range: (-0.3, 0.3),
        step: 0.1,
        dihedral_constraint: 0.3,
        ..Default::default()
    };
    let grid = sweep_trim_space(&aircraft, &opts).unwrap();
    let (defect, unmatched) = grid.mirror_defect();
    assert_eq!(unmatched, 0);
    assert!(defect < 1e-7, "{defect}");
    assert!(grid.trimmed_count() > 0);
}

#[test]
fn converged_continuation_points_satisfy_residual() {
    let aircraft = Aircraft::case_study();
    let t0 = TrimTarget::general(0.05, 0.0, 25.0, 0.0, ConstraintPolicy::InboardFrozen, MorphChannel::Dihedral);
    let t1 = TrimTarget { beta: -0.15, ..t0 };
    let p0 = solve_from_rest(&aircraft, &t0).unwrap();
    let p1 = continue_to(&aircraft, &p0, &t1).unwrap();
    assert!(p1.converged);
    let f = trim_residual(&aircraft, &t1, &p1.controls).unwrap();
    assert!(f.amax() < RESIDUAL_TOL);
    // nose-left sideslip freezes the right (inboard) wing
    assert_eq!(p1.target.proxy_control(), ControlId::Dihedral(morphwing::airframe::Side::Left));
    assert_eq!(p1.controls.right.dihedral, 0.0);
}
