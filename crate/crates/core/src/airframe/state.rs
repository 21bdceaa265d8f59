use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::euler::{rate_map, rate_map_unchecked, rotation_from_euler, Convention, EulerAngles};
use crate::error::Result;

pub type StateVector = SVector<f64, 12>;

/// The 12-component aircraft state `z = [vel_S, euler_rates, pos_S, euler]`.
///
/// `vel_S` and `pos_S` are earth-frame; `euler_rates` is ordered
/// `[pitch, yaw, roll]` and interpreted through the convention of `euler`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub vel: Vector3<f64>,
    pub euler_rates: Vector3<f64>,
    pub pos: Vector3<f64>,
    pub euler: EulerAngles,
}

impl AircraftState {
    pub fn at_rest(convention: Convention) -> Self {
        Self {
            vel: Vector3::zeros(),
            euler_rates: Vector3::zeros(),
            pos: Vector3::zeros(),
            euler: EulerAngles::zero(convention),
        }
    }

    /// The trim-state layout `[U, 0, ..., 0, pitch, yaw, roll]` (3-2-1).
    pub fn trim_layout(airspeed: f64, pitch: f64, yaw: f64, roll: f64) -> Self {
        Self {
            vel: Vector3::new(airspeed, 0.0, 0.0),
            euler_rates: Vector3::zeros(),
            pos: Vector3::zeros(),
            euler: EulerAngles::zyx(pitch, yaw, roll),
        }
    }

    pub fn convention(&self) -> Convention {
        self.euler.convention
    }

    pub fn to_vector(&self) -> StateVector {
        let mut z = StateVector::zeros();
        z.fixed_rows_mut::<3>(0).copy_from(&self.vel);
        z.fixed_rows_mut::<3>(3).copy_from(&self.euler_rates);
        z.fixed_rows_mut::<3>(6).copy_from(&self.pos);
        z.fixed_rows_mut::<3>(9).copy_from(&self.euler.as_vector());
        z
    }

    pub fn from_vector(z: &StateVector, convention: Convention) -> Self {
        Self {
            vel: z.fixed_rows::<3>(0).into(),
            euler_rates: z.fixed_rows::<3>(3).into(),
            pos: z.fixed_rows::<3>(6).into(),
            euler: EulerAngles::new(z[9], z[10], z[11], convention),
        }
    }

    /// Body angular velocity resolved in the earth frame.
    pub fn angular_velocity_earth(&self) -> Vector3<f64> {
        rotation_from_euler(&self.euler) * rate_map_unchecked(&self.euler) * self.euler_rates
    }

    pub fn angular_velocity_body(&self) -> Vector3<f64> {
        rate_map_unchecked(&self.euler) * self.euler_rates
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Re-express the attitude in the other Euler convention.
///
/// The rotation matrix, earth-frame angular velocity, velocity and position
/// are unchanged; the Euler rates are mapped through the new rate map.
pub fn convention_switch(state: &AircraftState) -> Result<AircraftState> {
    let target = state.euler.convention.other();
    to_convention(state, target)
}

pub fn to_convention(state: &AircraftState, target: Convention) -> Result<AircraftState> {
    if state.euler.convention == target {
        return Ok(*state);
    }
    let r = rotation_from_euler(&state.euler);
    let omega_b = rate_map(&state.euler)
        .map(|m| m * state.euler_rates)
        .unwrap_or_else(|_| rate_map_unchecked(&state.euler) * state.euler_rates);
    let euler = EulerAngles::from_rotation(&r, target);
    // The two poles lie on orthogonal axes, so at most one map is singular.
    let new_map = rate_map(&euler)?;
    let rates = new_map
        .lu()
        .solve(&omega_b)
        .expect("non-singular rate map");
    Ok(AircraftState {
        vel: state.vel,
        euler_rates: rates,
        pos: state.pos,
        euler,
    })
}
