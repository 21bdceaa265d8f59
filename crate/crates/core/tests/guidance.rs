use morphwing::guidance::*;
use morphwing::sim::IntegratorOptions;
use morphwing::trim::{trim_residual, ConstraintPolicy};
use morphwing::Aircraft;

fn scroll_spec(period: f64, alpha_amp: f64, beta_amp: f64) -> ScheduleSpec {
    ScheduleSpec::new(
        TargetPath::Scroll(ScrollPath::new(period, alpha_amp, beta_amp)),
        0.3,
        ConstraintPolicy::InboardFrozen,
    )
}

fn options() -> IntegratorOptions {
    IntegratorOptions {
        rel_tol: 1e-7,
        abs_tol: 1e-9,
        ..Default::default()
    }
}

fn tracking(aircraft: &Aircraft, schedule: &ControlSchedule) -> TrackingReport {
    let traj = schedule.fly(aircraft, &options()).unwrap();
    evaluate_tracking(&traj, &|t| schedule.target(t), Some(schedule.spec.tracking_span()))
}

#[test]
fn knot_controls_do_not_depend_on_period() {
    let aircraft = Aircraft::case_study();
    let a = build_schedule(&aircraft, &scroll_spec(10.0, 0.2, 0.2)).unwrap();
    let b = build_schedule(&aircraft, &scroll_spec(40.0, 0.2, 0.2)).unwrap();
    assert_eq!(a.phases, b.phases);
    assert_eq!(a.controls, b.controls);
    for (ta, tb) in a.times.iter().zip(&b.times) {
        assert!((tb - 4.0 * ta).abs() < 1e-12);
    }
}

#[test]
fn every_knot_is_a_trim() {
    let aircraft = Aircraft::case_study();
    let s = build_schedule(&aircraft, &scroll_spec(10.0, 0.2, 0.2)).unwrap();
    for k in 0..s.times.len() {
        let f = trim_residual(&aircraft, &s.trim_target(k), &s.controls[k]).unwrap();
        assert!(f.amax() < 1e-8, "knot {k}: {:e}", f.amax());
    }
    // the actuated wing follows the sign of the target sideslip
    for (t, c) in s.targets.iter().zip(&s.controls) {
        if t.beta > 0.0 {
            assert_eq!(c.left.dihedral, 0.3);
        } else {
            assert_eq!(c.right.dihedral, 0.3);
        }
    }
}

#[test]
fn constant_target_flies_level() {
    let aircraft = Aircraft::case_study();
    let spec = ScheduleSpec {
        loops: 1.0,
        ..scroll_spec(10.0, 0.0, 0.0)
    };
    let s = build_schedule(&aircraft, &spec).unwrap();
    assert!(s.controls.iter().all(|c| *c == s.controls[0]));
    let traj = s.fly(&aircraft, &IntegratorOptions::default()).unwrap();
    let r = evaluate_tracking(&traj, &|t| s.target(t), None);
    assert!(r.alpha.max < 1e-5 && r.beta.max < 1e-5 && r.roll.max < 1e-5, "{r:?}");
}

#[test]
fn tracking_improves_with_period() {
    let aircraft = Aircraft::case_study();
    for (a, b) in [(0.2, 0.0), (0.0, 0.2)] {
        let base = build_schedule(&aircraft, &scroll_spec(10.0, a, b)).unwrap();
        let rms: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&t| tracking(&aircraft, &base.rescaled(t)).orientation_rms())
            .collect();
        assert!(rms[0] > rms[1] && rms[1] > rms[2], "{rms:?}");
    }
}

#[test]
fn sideslip_tracks_better_than_angle_of_attack() {
    let aircraft = Aircraft::case_study();
    let pitch = build_schedule(&aircraft, &scroll_spec(10.0, 0.2, 0.0)).unwrap();
    let yaw = build_schedule(&aircraft, &scroll_spec(10.0, 0.0, 0.2)).unwrap();
    let a = tracking(&aircraft, &pitch).alpha.rms;
    let b = tracking(&aircraft, &yaw).beta.rms;
    assert!(b < a, "sideslip {b} vs angle of attack {a}");
}

#[test]
fn rectangular_path_schedule() {
    let aircraft = Aircraft::case_study();
    let rect = RectPath {
        period: 40.0,
        left: -0.15,
        right: 0.15,
        upper: 0.25,
        lower: 0.05,
        airspeed: 25.0,
    };
    let spec = ScheduleSpec {
        loops: 1.0,
        ..ScheduleSpec::new(TargetPath::Rect(rect), 0.3, ConstraintPolicy::InboardFrozen)
    };
    let s = build_schedule(&aircraft, &spec).unwrap();
    assert!(s.residuals.iter().all(|r| *r < 1e-8));
    let r = tracking(&aircraft, &s);
    assert!(r.alpha.max < 0.05 && r.beta.max < 0.05, "{r:?}");
}

#[test]
fn schedule_csv_has_one_row_per_knot() {
    let aircraft = Aircraft::case_study();
    let spec = ScheduleSpec {
        loops: 0.5,
        knots_per_period: 20,
        ..scroll_spec(10.0, 0.1, 0.0)
    };
    let s = build_schedule(&aircraft, &spec).unwrap();
    let csv = s.to_csv_string();
    assert_eq!(csv.lines().count(), s.times.len() + 1);
    assert!(csv.starts_with(KNOT_HEADER));
    assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), KNOT_HEADER.split(',').count());
}
