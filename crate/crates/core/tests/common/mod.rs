//! Independent reference computations shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use morphwing::airframe::{
    kinetic_energy, AircraftState, AirframeConfig, BodyGroup, Convention, EulerAngles, Side,
    WingPose, WingPoses,
};
use morphwing::controls::{ControlVector, WingAngles};
use morphwing::sim::{simulate, IntegratorOptions, Trajectory};
use morphwing::Aircraft;
use nalgebra::{Matrix3, Quaternion, SVector, UnitQuaternion, Vector3, Vector6};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn angles(rng: &mut ChaCha8Rng, max: f64) -> WingAngles {
    WingAngles::new(
        rng.random_range(-max..max),
        rng.random_range(-max..max),
        rng.random_range(-max..max),
    )
}

pub fn random_wings(rng: &mut ChaCha8Rng, max_angle: f64, max_rate: f64) -> WingPoses {
    let mut pose = |side| WingPose {
        side,
        tau: angles(rng, max_angle),
        tau_rate: angles(rng, max_rate),
        tau_accel: angles(rng, max_rate),
    };
    WingPoses {
        left: pose(Side::Left),
        right: pose(Side::Right),
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, max_rate: f64) -> AircraftState {
    let v = |rng: &mut ChaCha8Rng, m: f64| {
        Vector3::new(rng.random_range(-m..m), rng.random_range(-m..m), rng.random_range(-m..m))
    };
    AircraftState {
        vel: v(rng, 30.0),
        euler_rates: v(rng, max_rate),
        pos: v(rng, 5.0),
        euler: EulerAngles::zyx(
            rng.random_range(-1.2..1.2),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        ),
    }
}

fn pose_at(p: &WingPose, t: f64) -> WingPose {
    let a = |x: f64, xd: f64, xdd: f64| x + xd * t + 0.5 * xdd * t * t;
    WingPose {
        side: p.side,
        tau: WingAngles::new(
            a(p.tau.sweep, p.tau_rate.sweep, p.tau_accel.sweep),
            a(p.tau.incidence, p.tau_rate.incidence, p.tau_accel.incidence),
            a(p.tau.dihedral, p.tau_rate.dihedral, p.tau_accel.dihedral),
        ),
        tau_rate: WingAngles::new(
            p.tau_rate.sweep + p.tau_accel.sweep * t,
            p.tau_rate.incidence + p.tau_accel.incidence * t,
            p.tau_rate.dihedral + p.tau_accel.dihedral * t,
        ),
        tau_accel: p.tau_accel,
    }
}

fn wings_at(w: &WingPoses, t: f64) -> WingPoses {
    WingPoses {
        left: pose_at(&w.left, t),
        right: pose_at(&w.right, t),
    }
}

fn with_q(state: &AircraftState, q: &Vector6<f64>, qd: &Vector6<f64>) -> AircraftState {
    AircraftState {
        vel: qd.fixed_rows::<3>(0).into(),
        euler_rates: qd.fixed_rows::<3>(3).into(),
        pos: q.fixed_rows::<3>(0).into(),
        euler: EulerAngles::new(q[3], q[4], q[5], state.euler.convention),
    }
}

fn split(state: &AircraftState) -> (Vector6<f64>, Vector6<f64>) {
    let mut q = Vector6::zeros();
    let mut qd = Vector6::zeros();
    q.fixed_rows_mut::<3>(0).copy_from(&state.pos);
    q.fixed_rows_mut::<3>(3).copy_from(&state.euler.as_vector());
    qd.fixed_rows_mut::<3>(0).copy_from(&state.vel);
    qd.fixed_rows_mut::<3>(3).copy_from(&state.euler_rates);
    (q, qd)
}

/// Central-difference Hessian of the kinetic energy in the generalized velocities.
pub fn fd_mass_matrix(cfg: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> nalgebra::Matrix6<f64> {
    let (q, qd) = split(state);
    let ke = |d: &Vector6<f64>| kinetic_energy(cfg, &with_q(state, &q, &(qd + d)), wings);
    // the energy is quadratic in the velocities, so a large step is exact
    let h = 0.5;
    nalgebra::Matrix6::from_fn(|i, j| {
        let e = |a: f64, b: f64| {
            let mut d = Vector6::zeros();
            d[i] += a;
            d[j] += b;
            ke(&d)
        };
        (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h)
    })
}

fn five_point(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// `d/dt dK/dqdot - dK/dq` at zero generalized acceleration, by finite
/// differences of the kinetic energy along the prescribed wing motion.
pub fn fd_inertial_residual(cfg: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> Vector6<f64> {
    let (q, qd) = split(state);
    let momentum = |k: usize, t: f64| {
        let qt = q + qd * t;
        let w = wings_at(wings, t);
        let h = 0.5;
        let mut p = qd;
        p[k] += h;
        let plus = kinetic_energy(cfg, &with_q(state, &qt, &p), &w);
        p[k] -= 2.0 * h;
        let minus = kinetic_energy(cfg, &with_q(state, &qt, &p), &w);
        (plus - minus) / (2.0 * h)
    };
    Vector6::from_fn(|k, _| {
        let dpdt = five_point(|t| momentum(k, t), 1e-3);
        let dkdq = five_point(
            |s| {
                let mut qs = q;
                qs[k] += s;
                kinetic_energy(cfg, &with_q(state, &qs, &qd), wings)
            },
            1e-4,
        );
        dpdt - dkdq
    })
}

fn axis_quat(axis: usize, angle: f64) -> UnitQuaternion<f64> {
    let a = [Vector3::x_axis(), Vector3::y_axis(), Vector3::z_axis()][axis];
    UnitQuaternion::from_axis_angle(&a, angle)
}

/// Body attitude composed from elementary quaternions.
pub fn euler_quaternion(e: &EulerAngles) -> UnitQuaternion<f64> {
    match e.convention {
        Convention::Zyx321 => axis_quat(2, e.yaw) * axis_quat(1, e.pitch) * axis_quat(0, e.roll),
        Convention::Yzx231 => axis_quat(1, e.pitch) * axis_quat(2, e.yaw) * axis_quat(0, e.roll),
    }
}

/// Wing attitude relative to the fuselage: sweep about z, incidence about y,
/// dihedral (tip up) about x; the left wing is the mirror image.
pub fn wing_quaternion(side: Side, tau: &WingAngles) -> UnitQuaternion<f64> {
    let q = axis_quat(2, tau.sweep) * axis_quat(1, tau.incidence) * axis_quat(0, -tau.dihedral);
    match side {
        Side::Right => q,
        Side::Left => {
            let v = q.imag();
            UnitQuaternion::new_unchecked(Quaternion::new(q.w, -v.x, v.y, -v.z))
        }
    }
}

/// Kinetic energy from quaternion kinematics: body positions and attitudes
/// are differentiated in time along the state's velocities.
pub fn quaternion_kinetic_energy(cfg: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> f64 {
    let (q, qd) = split(state);
    let attitude = |t: f64, body: usize| -> (Vector3<f64>, UnitQuaternion<f64>) {
        let qt = q + qd * t;
        let e = EulerAngles::new(qt[3], qt[4], qt[5], state.euler.convention);
        let qb = euler_quaternion(&e);
        let x_s: Vector3<f64> = qt.fixed_rows::<3>(0).into();
        let b = &cfg.bodies[body];
        match (b.group, b.side) {
            (BodyGroup::Wing, Some(side)) => {
                let w = wings_at(wings, t);
                let qw = wing_quaternion(side, &w.get(side).tau);
                let p = cfg.wing_root_for(side) + qw * b.com();
                (x_s + qb * p, qb * qw)
            }
            _ => (x_s + qb * b.com(), qb),
        }
    };
    let h = 5e-4;
    let mut total = 0.0;
    for (i, b) in cfg.bodies.iter().enumerate() {
        let d = |t: f64| attitude(t, i);
        let vel = Vector3::from_fn(|k, _| five_point(|t| d(t).0[k], h));
        let q0 = d(0.0).1;
        let qdot = nalgebra::Vector4::from_fn(|k, _| five_point(|t| d(t).1.coords[k], h));
        let qdot = Quaternion::from(qdot);
        let omega_body = (q0.conjugate().into_inner() * qdot).imag() * 2.0;
        total += 0.5 * b.mass * vel.norm_squared()
            + 0.5 * omega_body.dot(&(b.inertia_matrix() * omega_body));
    }
    total
}

/// Rigid-body inertia about the combined center of mass with the wings at
/// their neutral pose, together with that center.
pub fn neutral_inertia(cfg: &AirframeConfig) -> (Matrix3<f64>, Vector3<f64>) {
    let pos = |b: &morphwing::airframe::RigidBodyElement| match (b.group, b.side) {
        (BodyGroup::Wing, Some(side)) => cfg.wing_root_for(side) + b.com(),
        _ => b.com(),
    };
    let m: f64 = cfg.bodies.iter().map(|b| b.mass).sum();
    let c = cfg.bodies.iter().map(|b| pos(b) * b.mass).sum::<Vector3<f64>>() / m;
    let mut inertia = Matrix3::zeros();
    for b in &cfg.bodies {
        let r = pos(b) - c;
        inertia += b.inertia_matrix() + b.mass * (Matrix3::identity() * r.norm_squared() - r * r.transpose());
    }
    (inertia, c)
}

/// Torque-free rigid rotation with state `[q (w, x, y, z), omega_body]`,
/// integrated from zero and reported exactly at each checkpoint time.
pub fn quaternion_reference(
    inertia: &Matrix3<f64>,
    q0: UnitQuaternion<f64>,
    omega0: Vector3<f64>,
    checkpoints: &[f64],
    rel_tol: f64,
) -> Vec<UnitQuaternion<f64>> {
    let inv = inertia.try_inverse().unwrap();
    let mut z = SVector::<f64, 7>::zeros();
    z[0] = q0.w;
    z[1] = q0.i;
    z[2] = q0.j;
    z[3] = q0.k;
    z.fixed_rows_mut::<3>(4).copy_from(&omega0);
    let f = |_t: f64, z: &SVector<f64, 7>| -> morphwing::Result<SVector<f64, 7>> {
        let q = Quaternion::new(z[0], z[1], z[2], z[3]);
        let w: Vector3<f64> = z.fixed_rows::<3>(4).into();
        let qd = q * Quaternion::from_imag(w) * 0.5;
        let wd = inv * (-w.cross(&(inertia * w)));
        let mut out = SVector::<f64, 7>::zeros();
        out[0] = qd.w;
        out[1] = qd.i;
        out[2] = qd.j;
        out[3] = qd.k;
        out.fixed_rows_mut::<3>(4).copy_from(&wd);
        Ok(out)
    };
    let tol = morphwing::sim::Tolerances {
        rel_tol,
        abs_tol: rel_tol * 1e-2,
    };
    let mut t = 0.0;
    let mut out = Vec::new();
    for &tc in checkpoints {
        if tc > t {
            let (_, zs) = morphwing::sim::integrate(f, t, z, tc, &tol, 1e-3, 0.01).unwrap();
            z = *zs.last().unwrap();
            t = tc;
        }
        out.push(UnitQuaternion::from_quaternion(Quaternion::new(z[0], z[1], z[2], z[3])));
    }
    out
}

/// Rotation angle between two attitudes.
pub fn attitude_error(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    a.angle_to(b)
}

pub fn force_free() -> Aircraft {
    let mut cfg = AirframeConfig::case_study();
    cfg.air_density = 0.0;
    cfg.gravity = 0.0;
    Aircraft::new(cfg).unwrap()
}

pub fn tumble_state() -> AircraftState {
    let mut s = AircraftState::trim_layout(3.0, 0.3, 0.2, -0.1);
    s.vel = Vector3::new(3.0, -1.0, 0.5);
    s.euler_rates = Vector3::new(1.5, 0.1, 0.1);
    s
}

pub fn options(rel_tol: f64, abs_tol: f64) -> IntegratorOptions {
    IntegratorOptions {
        rel_tol,
        abs_tol,
        ..Default::default()
    }
}

/// Simulated attitude at each checkpoint, restarting the integrator at each.
pub fn attitude_at(
    aircraft: &Aircraft,
    z0: &AircraftState,
    checkpoints: &[f64],
    opts: &IntegratorOptions,
) -> (Vec<UnitQuaternion<f64>>, usize, f64) {
    let controls = ControlVector::default();
    let mut state = *z0;
    let mut t = 0.0;
    let mut out = Vec::new();
    let mut switches = 0;
    let mut max_pitch: f64 = 0.0;
    for &tc in checkpoints {
        if tc > t {
            let traj: Trajectory = simulate(aircraft, &controls, &state, (t, tc), opts).unwrap();
            switches += traj.pole_switches();
            for s in &traj.states {
                max_pitch = max_pitch.max(pitch_of(s));
            }
            state = *traj.last();
            t = tc;
        }
        out.push(euler_quaternion(&state.euler));
    }
    (out, switches, max_pitch)
}

/// Magnitude of the 3-2-1 pitch angle, whatever the stored convention.
pub fn pitch_of(s: &AircraftState) -> f64 {
    let r = morphwing::airframe::rotation_from_euler(&s.euler);
    (-r[(2, 0)]).clamp(-1.0, 1.0).asin().abs()
}

pub fn tumble_errors(rel_tol: f64, max_step: f64) -> (f64, usize, f64) {
    let aircraft = force_free();
    let z0 = tumble_state();
    let (inertia, _) = neutral_inertia(&aircraft.config);
    let checkpoints: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
    let q0 = euler_quaternion(&z0.euler);
    let reference = quaternion_reference(
        &inertia,
        q0,
        z0.angular_velocity_body(),
        &checkpoints,
        1e-12,
    );
    let opts = IntegratorOptions {
        max_step,
        ..options(rel_tol, rel_tol * 1e-2)
    };
    let (sim, switches, max_pitch) = attitude_at(&aircraft, &z0, &checkpoints, &opts);
    let err = sim
        .iter()
        .zip(&reference)
        .map(|(a, b)| attitude_error(a, b))
        .fold(0.0, f64::max);
    (err, switches, max_pitch)
}

