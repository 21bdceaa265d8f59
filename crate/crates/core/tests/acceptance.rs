//! Acceptance suite: runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use morphwing::aero::{eval_coefficients, station_deflection, station_flows_body};
use morphwing::airframe::{
    assemble_eom, kinetic_energy, momenta, rotation_from_euler, to_convention, AirframeConfig,
    Convention, WingPoses,
};
use morphwing::controls::{ControlId, ControlVector};
use morphwing::exec::Execution;
use morphwing::guidance::*;
use morphwing::sim::{simulate, IntegratorOptions};
use morphwing::spectral::*;
use morphwing::stability::*;
use morphwing::trim::*;
use morphwing::Aircraft;
use nalgebra::SVector;

const SIXTY_DEG: f64 = std::f64::consts::FRAC_PI_3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}

fn eom_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = AirframeConfig::case_study();
    let mut rng = common::rng(101);
    let (mut worst_b1, mut worst_force): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let state = common::random_state(&mut rng, 2.0);
        let wings = common::random_wings(&mut rng, SIXTY_DEG, 2.0);
        let eom = assemble_eom(&cfg, &state, &wings).unwrap();
        let b1 = common::fd_mass_matrix(&cfg, &state, &wings);
        let scale = b1.abs().max();
        worst_b1 = worst_b1.max((eom.b1 - b1).abs().max() / scale);
        let f = common::fd_inertial_residual(&cfg, &state, &wings);
        let ours = eom.b0z - eom.f0;
        worst_force = worst_force.max((ours - f).abs().max() / f.norm().max(1.0));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_b1 < 1e-6 && worst_force < 1e-5 && secs < 60.0,
        format!("mass matrix rel {worst_b1:.2e}, inertial terms rel {worst_force:.2e}, {secs:.2} s"),
    )
}

fn conservation() -> Outcome {
    let aircraft = common::force_free();
    let mut controls = ControlVector::default();
    controls.left.dihedral = 0.3;
    controls.right.sweep = 0.2;
    let wings = WingPoses::from_controls(&controls, &Default::default());
    let z0 = common::tumble_state();
    let traj = simulate(&aircraft, &controls, &z0, (0.0, 10.0), &common::options(1e-9, 1e-11)).unwrap();
    let e0 = kinetic_energy(&aircraft.config, &z0, &wings);
    let (_, h0) = momenta(&aircraft.config, &z0, &wings);
    let (mut de, mut dh): (f64, f64) = (0.0, 0.0);
    for s in &traj.states {
        let (_, h) = momenta(&aircraft.config, s, &wings);
        de = de.max(rel(kinetic_energy(&aircraft.config, s, &wings), e0, e0));
        dh = dh.max((h - h0).norm() / h0.norm());
    }
    outcome(
        de < 1e-6 && dh < 1e-6,
        format!("energy rel {de:.2e}, angular momentum rel {dh:.2e}"),
    )
}

fn quaternion_crosscheck() -> Outcome {
    let (err, switches, max_pitch) = common::tumble_errors(1e-9, 0.02);
    outcome(
        err < 1e-6 && max_pitch > 85f64.to_radians() && switches >= 1,
        format!(
            "attitude error {err:.2e} rad, max pitch {:.1} deg, {switches} pole switches",
            max_pitch.to_degrees()
        ),
    )
}

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
    let speed = state.vel.norm();
    for strip in &aircraft.strips {
        drag += rho * speed * speed * strip.radius * strip.width * strip.cd0;
    }
    drag
}

fn trim_correctness() -> Outcome {
    let aircraft = Aircraft::case_study();
    let p = solve_trim(&aircraft, &TrimTarget::pitch(0.0, 25.0), &ControlVector::default()).unwrap();
    let residual = trim_residual(&aircraft, &p.target, &p.controls).unwrap().amax();
    let drag = summed_drag(&aircraft, &p);
    let thrust = p.controls.thrust * aircraft.config.thrust.direction[0];
    let z0 = p.target.state();
    let traj = simulate(&aircraft, &p.controls, &z0, (0.0, 15.0), &IntegratorOptions::default()).unwrap();
    let r0 = rotation_from_euler(&z0.euler);
    let drift = traj
        .states
        .iter()
        .map(|s| nalgebra::Rotation3::from_matrix_unchecked(r0.transpose() * rotation_from_euler(&s.euler)).angle())
        .fold(0.0, f64::max);
    let end = to_convention(traj.last(), Convention::Zyx321).unwrap();
    let speed_drift = (end.vel - z0.vel).norm();
    outcome(
        p.converged && residual < 1e-8 && (thrust - drag).abs() < 1e-6 && drift < 0.05,
        format!(
            "residual {residual:.1e}, thrust {thrust:.6} N vs drag {drag:.6} N, attitude drift {drift:.2e} rad, velocity drift {speed_drift:.2e} m/s"
        ),
    )
}

fn envelope_mechanism() -> Outcome {
    let aircraft = Aircraft::case_study();
    let targets: Vec<TrimTarget> = (0..=150).map(|k| TrimTarget::pitch(0.01 * k as f64, 25.0)).collect();
    let path = continue_path(&aircraft, &targets, &ControlVector::default()).unwrap();
    let last = path.last().unwrap();
    let clean = path[..path.len() - 1].iter().all(|p| p.converged && p.active_limits.is_empty());
    outcome(
        !last.converged && last.active_limits == vec![ControlId::Elevator] && clean,
        format!(
            "continuation stops at alpha {:.2} rad with active limits {:?}, elevator {:.3} rad",
            last.target.alpha,
            last.active_limit_names(),
            last.controls.elevator
        ),
    )
}

struct Spaces {
    grids: Vec<(f64, ConstraintPolicy, MorphChannel, TrimSpaceGrid)>,
    seconds: f64,
}

impl Spaces {
    fn get(&self, u: f64, policy: ConstraintPolicy, channel: MorphChannel) -> &TrimSpaceGrid {
        &self
            .grids
            .iter()
            .find(|g| g.0 == u && g.1 == policy && g.2 == channel)
            .unwrap()
            .3
    }
}

fn trim_spaces() -> Spaces {
    let aircraft = Aircraft::case_study();
    let start = Instant::now();
    let mut grids = Vec::new();
    for u in [25.0, 50.0] {
        for policy in [ConstraintPolicy::OutboardFrozen, ConstraintPolicy::InboardFrozen] {
            for channel in [MorphChannel::Dihedral, MorphChannel::Sweep] {
                let opts = SweepOptions {
                    alpha_range: (-0.8, 0.9),
                    beta_range: (-0.8, 0.8),
                    airspeed: u,
                    policy,
                    channel,
                    ..Default::default()
                };
                grids.push((u, policy, channel, sweep_trim_space(&aircraft, &opts).unwrap()));
            }
        }
    }
    Spaces {
        grids,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn touches_edge(g: &TrimSpaceGrid) -> bool {
    let (na, nb) = (g.alphas.len(), g.betas.len());
    (0..na).any(|i| g.cell(i, 0).is_trimmed() || g.cell(i, nb - 1).is_trimmed())
        || (0..nb).any(|j| g.cell(0, j).is_trimmed() || g.cell(na - 1, j).is_trimmed())
}

fn trim_space_structure(spaces: &Spaces) -> Outcome {
    use ConstraintPolicy::*;
    let dih = spaces.get(25.0, OutboardFrozen, MorphChannel::Dihedral);
    let sweep = spaces.get(25.0, OutboardFrozen, MorphChannel::Sweep);
    let contained = dih.contains(sweep);
    let mut mirror: f64 = 0.0;
    let mut unmatched = 0;
    let mut edges = false;
    for g in &spaces.grids {
        let (d, u) = g.3.mirror_defect();
        mirror = mirror.max(d);
        unmatched += u;
        edges |= touches_edge(&g.3);
    }
    let inboard = spaces
        .get(25.0, InboardFrozen, MorphChannel::Dihedral)
        .contains(spaces.get(25.0, InboardFrozen, MorphChannel::Sweep));
    outcome(
        contained && mirror < 1e-7 && unmatched == 0 && !edges && spaces.seconds < 300.0,
        format!(
            "outboard dihedral {} cells contains sweep {} cells: {contained}; mirror defect {mirror:.1e} ({unmatched} unmatched); \
             region inside lattice: {}; {} grids in {:.1} s (info: inboard containment {inboard})",
            dih.trimmed_count(),
            sweep.trimmed_count(),
            !edges,
            spaces.grids.len(),
            spaces.seconds
        ),
    )
}

fn airspeed_insensitivity(spaces: &Spaces) -> Outcome {
    use ConstraintPolicy::*;
    let change = |p, c| {
        let a = spaces.get(25.0, p, c).area();
        let b = spaces.get(50.0, p, c).area();
        (b - a) / a
    };
    let primary = change(OutboardFrozen, MorphChannel::Dihedral);
    let info: Vec<String> = [
        (InboardFrozen, MorphChannel::Dihedral),
        (OutboardFrozen, MorphChannel::Sweep),
        (InboardFrozen, MorphChannel::Sweep),
    ]
    .iter()
    .map(|&(p, c)| format!("{}/{} {:+.1}%", p.name(), c.name(), 100.0 * change(p, c)))
    .collect();
    outcome(
        primary.abs() < 0.15,
        format!(
            "outboard dihedral area {:.4} -> {:.4} rad^2 ({:+.1}%); info: {}",
            spaces.get(25.0, OutboardFrozen, MorphChannel::Dihedral).area(),
            spaces.get(50.0, OutboardFrozen, MorphChannel::Dihedral).area(),
            100.0 * primary,
            info.join(", ")
        ),
    )
}

fn general_trim(aircraft: &Aircraft, alpha: f64, beta: f64, gamma: f64) -> TrimPoint {
    let t = TrimTarget::general(alpha, beta, 25.0, gamma, ConstraintPolicy::InboardFrozen, MorphChannel::Dihedral);
    solve_from_rest(aircraft, &t).unwrap()
}

fn stability_consistency() -> Outcome {
    let aircraft = Aircraft::case_study();
    let p = general_trim(&aircraft, 0.0, 0.0, 0.3);
    let j = linearize(&aircraft, &p).unwrap();
    let modes = modal_analysis(&j, 25.0);
    let period = modes.dominant_oscillation().unwrap().period();
    let mut dz0 = SVector::<f64, 12>::zeros();
    dz0[0] = 0.05;
    dz0[2] = 0.05;
    dz0[9] = 1e-3;
    dz0[10] = 1e-3;
    let err = linearization_error(&aircraft, &p, &j, &dz0, period, 40, &IntegratorOptions::default()).unwrap();
    let scale = j.abs().max();
    let mut coupling: f64 = 0.0;
    for &r in &LONGITUDINAL {
        for &c in &LATERAL {
            coupling = coupling.max(j[(r, c)].abs()).max(j[(c, r)].abs());
        }
    }
    let conjugate = modes.is_conjugate_symmetric();
    outcome(
        modes.is_stable() && err < 0.05 && conjugate && coupling < 1e-6 * scale,
        format!(
            "linear vs nonlinear {:.2}% over {period:.2} s, conjugate symmetric: {conjugate}, cross-coupling {:.1e} of max entry",
            100.0 * err,
            coupling / scale
        ),
    )
}

fn spiral_ordering() -> Outcome {
    let aircraft = Aircraft::case_study();
    let opts = IntegratorOptions::default();
    let metric = |gamma| {
        let p = general_trim(&aircraft, 0.0, 0.0, gamma);
        perturbation_metrics(&aircraft, &p, DEFAULT_YAW_PERTURBATION, DEFAULT_DEVIATION_TIME, &opts)
            .unwrap()
            .delta_phi
    };
    let (flat, raised) = (metric(0.0), metric(0.3));
    outcome(
        raised < flat,
        format!("roll deviation {raised:.3} at dihedral 0.3 vs {flat:.3} at 0"),
    )
}

fn scroll(period: f64, a: f64, b: f64) -> ScheduleSpec {
    ScheduleSpec::new(TargetPath::Scroll(ScrollPath::new(period, a, b)), 0.3, ConstraintPolicy::InboardFrozen)
}

fn fly_options(probes: Vec<String>) -> IntegratorOptions {
    IntegratorOptions {
        rel_tol: 1e-7,
        abs_tol: 1e-9,
        probes,
        ..Default::default()
    }
}

fn tracking(aircraft: &Aircraft, s: &ControlSchedule) -> TrackingReport {
    let traj = s.fly(aircraft, &fly_options(Vec::new())).unwrap();
    evaluate_tracking(&traj, &|t| s.target(t), Some(s.spec.tracking_span()))
}

fn schedule_properties() -> Outcome {
    let aircraft = Aircraft::case_study();
    let short = build_schedule(&aircraft, &scroll(10.0, 0.2, 0.2)).unwrap();
    let long = build_schedule(&aircraft, &scroll(40.0, 0.2, 0.2)).unwrap();
    let invariant = short.controls == long.controls && short.phases == long.phases;
    let residual = short
        .times
        .iter()
        .enumerate()
        .map(|(k, _)| trim_residual(&aircraft, &short.trim_target(k), &short.controls[k]).unwrap().amax())
        .fold(0.0, f64::max);
    let mut monotone = true;
    let mut lines = Vec::new();
    let mut axis = (0.0, 0.0);
    for (name, a, b) in [("pitch", 0.2, 0.0), ("yaw", 0.0, 0.2), ("combined", 0.2, 0.2)] {
        let base = build_schedule(&aircraft, &scroll(10.0, a, b)).unwrap();
        let reports: Vec<TrackingReport> =
            [10.0, 20.0, 40.0].iter().map(|&t| tracking(&aircraft, &base.rescaled(t))).collect();
        let rms: Vec<f64> = reports.iter().map(|r| r.orientation_rms()).collect();
        monotone &= rms[0] > rms[1] && rms[1] > rms[2];
        lines.push(format!("{name} {:.1e}/{:.1e}/{:.1e}", rms[0], rms[1], rms[2]));
        match name {
            "pitch" => axis.0 = reports[0].alpha.rms,
            "yaw" => axis.1 = reports[0].beta.rms,
            _ => {}
        }
    }
    outcome(
        invariant && residual < 1e-8 && monotone && axis.1 < axis.0,
        format!(
            "period-invariant knots: {invariant}; max knot residual {residual:.1e}; orientation RMS at T=10/20/40: {}; \
             sideslip RMS {:.1e} vs angle-of-attack RMS {:.1e} at T=10",
            lines.join(", "),
            axis.1,
            axis.0
        ),
    )
}

fn scroll_assessment(aircraft: &Aircraft, period: f64, a: f64, b: f64) -> RunAssessment {
    let probes: Vec<String> = aircraft.tip_stations().into_iter().map(|i| aircraft.stations[i].label()).collect();
    let s = build_schedule(aircraft, &scroll(period, a, b)).unwrap();
    let traj = s.fly(aircraft, &fly_options(probes)).unwrap();
    let reports: Vec<UnsteadinessReport> =
        analyze_probes(&traj, s.spec.tracking_span(), period, DEFAULT_KAPPA_THRESHOLD, Execution::Parallel)
            .unwrap()
            .into_iter()
            .map(|(_, r)| r)
            .collect();
    assess_run(&reports)
}

fn spectral_certification() -> Outcome {
    let dt = 0.02;
    let x: Vec<f64> = (0..5000).map(|i| 0.2 * (0.2 * std::f64::consts::PI * i as f64 * dt).sin()).collect();
    let s = amplitude_spectrum(&x, dt).unwrap();
    let peak = s.amplitude.iter().copied().fold(0.0, f64::max);
    let calibration = (peak - 0.2).abs() / 0.2;
    let kappa = reduced_frequency(0.075, 0.628, 25.0);
    let kappa_ok = format!("{kappa:.5}") == "0.00188";
    let aircraft = Aircraft::case_study();
    let slow = scroll_assessment(&aircraft, 10.0, 0.2, 0.0);
    let fast = scroll_assessment(&aircraft, 5.0, 0.2, 0.2);
    outcome(
        calibration < 0.01 && kappa_ok && slow.worst_ratio < 0.01 && !slow.flagged() && fast.flagged(),
        format!(
            "calibration error {:.3}%, kappa {kappa:.6}, T=10 pitch scroll worst ratio {:.1e} ({}), T=5 combined scroll worst ratio {:.1e} on {} ({})",
            100.0 * calibration,
            slow.worst_ratio,
            if slow.flagged() { "flagged" } else { "quasisteady" },
            fast.worst_ratio,
            fast.worst_probe.as_deref().unwrap_or("-"),
            if fast.flagged() { "flagged" } else { "quasisteady" }
        ),
    )
}

fn thrust_bound() -> Outcome {
    let aircraft = Aircraft::case_study();
    let weight = aircraft.weight();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (name, a, b) in [("pitch", 0.2, 0.0), ("yaw", 0.0, 0.2), ("combined", 0.2, 0.2)] {
        let s = build_schedule(&aircraft, &scroll(10.0, a, b)).unwrap();
        let ratio = s.peak_thrust() / weight;
        worst = worst.max(ratio);
        lines.push(format!("{name} {ratio:.3}"));
    }
    outcome(
        worst <= 0.25,
        format!("peak thrust / weight: {} (worst {worst:.3})", lines.join(", ")),
    )
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f));
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!("{} {name}: {detail} [{secs:.1} s]", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() {
    let mut results = vec![
        run("1 equations of motion match the Lagrangian oracle", eom_oracle),
        run("2 force-free tumble conserves energy and momentum", conservation),
        run("3 pole switching matches the quaternion reference", quaternion_crosscheck),
        run("4 level trim, drag balance and trim hold", trim_correctness),
        run("5 pitch envelope ends on the elevator limit", envelope_mechanism),
    ];
    let spaces = catch_unwind(trim_spaces).ok();
    match &spaces {
        Some(s) => {
            results.push(run("6 trim-space containment and mirror symmetry", || trim_space_structure(s)));
            results.push(run("7 trim-space area across airspeed", || airspeed_insensitivity(s)));
        }
        None => {
            results.push(run("6 trim-space containment and mirror symmetry", || outcome(false, "sweep failed")));
            results.push(run("7 trim-space area across airspeed", || outcome(false, "sweep failed")));
        }
    }
    results.push(run("8 linearization, spectrum symmetry and decoupling", stability_consistency));
    results.push(run("9 dihedral reduces spiral roll deviation", spiral_ordering));
    results.push(run("10 scroll schedule properties", schedule_properties));
    results.push(run("11 spectral certification", spectral_certification));
    results.push(run("12 peak thrust bound", thrust_bound));
    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", results.len());
}
