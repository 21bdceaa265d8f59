//! Equations of motion of the fuselage-plus-wings multibody system in the
//! generalized coordinates `q = [x_S, theta]`.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use super::euler::{rate_map, rate_map_derivative_product, rotation_from_euler, skew};
use super::kinematics::{element_frames, ElementFrame, WingPoses};
use super::state::{AircraftState, StateVector};
use super::AirframeConfig;
use crate::error::{Error, Result};

/// Conditioning bound above which the mass matrix is reported ill-conditioned.
pub const MAX_MASS_CONDITION: f64 = 1e12;

/// `B1 qdd = f + f0 - B0z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomCoefficients {
    /// Generalized mass matrix acting on `[xdd_S, theta_dd]`.
    pub b1: Matrix6<f64>,
    /// Velocity-dependent inertial terms with the wings held at their pose.
    pub b0z: Vector6<f64>,
    /// Inertial forcing from wing rates and accelerations.
    pub f0: Vector6<f64>,
}

impl EomCoefficients {
    pub fn condition_number(&self) -> f64 {
        let ev = self.b1.symmetric_eigenvalues();
        let max = ev.iter().cloned().fold(f64::MIN, f64::max);
        let min = ev.iter().cloned().fold(f64::MAX, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Generalized accelerations for the given external load vector.
    pub fn solve(&self, f: &Vector6<f64>) -> Result<Vector6<f64>> {
        let rhs = f + self.f0 - self.b0z;
        let cond = self.condition_number();
        if !(cond <= MAX_MASS_CONDITION) {
            return Err(Error::IllConditioned { cond });
        }
        let chol = self
            .b1
            .cholesky()
            .ok_or(Error::IllConditioned { cond })?;
        Ok(chol.solve(&rhs))
    }
}

/// Inertial part of the generalized force, `sum m a . dx/dq + ...` at `qdd = 0`.
fn inertial_residual(
    frames: &[ElementFrame],
    omega: &Vector3<f64>,
    omega_dot0: &Vector3<f64>,
    with_morphing: bool,
) -> (Vector3<f64>, Vector3<f64>) {
    let mut force_b = Vector3::zeros();
    let mut moment_b = Vector3::zeros();
    for e in frames {
        let p = e.com;
        let mut a = omega.cross(&omega.cross(&p)) + omega_dot0.cross(&p);
        let mut alpha = *omega_dot0;
        let mut w_i = *omega;
        if with_morphing {
            let wr = e.rel_rate;
            let rho = e.lever;
            a += 2.0 * omega.cross(&wr.cross(&rho))
                + e.rel_accel.cross(&rho)
                + wr.cross(&wr.cross(&rho));
            alpha += e.rel_accel + omega.cross(&wr);
            w_i += wr;
        }
        force_b += e.mass * a;
        moment_b += e.mass * p.cross(&a) + e.inertia_b * alpha + w_i.cross(&(e.inertia_b * w_i));
    }
    (force_b, moment_b)
}

/// Assemble the mass matrix and inertial terms at the given state and wing motion.
pub fn assemble_eom(
    config: &AirframeConfig,
    state: &AircraftState,
    wings: &WingPoses,
) -> Result<EomCoefficients> {
    let omega_map = rate_map(&state.euler)?;
    let r = rotation_from_euler(&state.euler);
    let omega = omega_map * state.euler_rates;
    let omega_dot0 = rate_map_derivative_product(&state.euler, &state.euler_rates);
    let frames = element_frames(config, wings);

    let mut mass = 0.0;
    let mut first_moment = Vector3::zeros();
    let mut inertia_s = Matrix3::zeros();
    for e in &frames {
        mass += e.mass;
        first_moment += e.mass * e.com;
        let sp = skew(&e.com);
        inertia_s += e.inertia_b - e.mass * sp * sp;
    }

    let mut b1 = Matrix6::zeros();
    b1.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Matrix3::identity() * mass));
    let coupling = -r * skew(&first_moment) * omega_map;
    b1.fixed_view_mut::<3, 3>(0, 3).copy_from(&coupling);
    b1.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&coupling.transpose());
    b1.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(omega_map.transpose() * inertia_s * omega_map));

    let generalize = |(f, m): (Vector3<f64>, Vector3<f64>)| {
        let mut g = Vector6::zeros();
        g.fixed_rows_mut::<3>(0).copy_from(&(r * f));
        g.fixed_rows_mut::<3>(3)
            .copy_from(&(omega_map.transpose() * m));
        g
    };
    let rigid = generalize(inertial_residual(&frames, &omega, &omega_dot0, false));
    let full = generalize(inertial_residual(&frames, &omega, &omega_dot0, true));

    Ok(EomCoefficients {
        b1,
        b0z: rigid,
        f0: -(full - rigid),
    })
}

/// Assemble `zdot = [qdd, xdot_S, theta_dot]` given the generalized external loads.
pub fn state_derivative_with_loads(
    config: &AirframeConfig,
    state: &AircraftState,
    wings: &WingPoses,
    loads: &Vector6<f64>,
) -> Result<StateVector> {
    let eom = assemble_eom(config, state, wings)?;
    let qdd = eom.solve(loads)?;
    let mut z = StateVector::zeros();
    z.fixed_rows_mut::<6>(0).copy_from(&qdd);
    z.fixed_rows_mut::<3>(6).copy_from(&state.vel);
    z.fixed_rows_mut::<3>(9).copy_from(&state.euler_rates);
    Ok(z)
}
