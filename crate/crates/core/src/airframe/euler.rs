//! Euler-angle attitude parameterization.
//!
//! Angles are always stored as `[pitch, yaw, roll]`. Two rotation sequences
//! are supported: the primary 3-2-1 (yaw-pitch-roll, z-y-x) sequence and the
//! 2-3-1 (pitch-yaw-roll, y-z-x) sequence used to step around the 3-2-1
//! pole at pitch = +-pi/2.
//!
//! Frames: earth is north-east-down, body is x-forward, y-starboard, z-down.
//! `R_{E/B}` maps body-frame components to earth-frame components.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinant threshold below which a rate map is reported singular.
pub const POLE_DET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `R = Rz(yaw) Ry(pitch) Rx(roll)`; pole at |pitch| = pi/2.
    #[serde(rename = "zyx_321")]
    Zyx321,
    /// `R = Ry(pitch) Rz(yaw) Rx(roll)`; pole at |yaw| = pi/2.
    #[serde(rename = "yzx_231")]
    Yzx231,
}

impl Convention {
    pub fn other(self) -> Self {
        match self {
            Convention::Zyx321 => Convention::Yzx231,
            Convention::Yzx231 => Convention::Zyx321,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Convention::Zyx321 => "321",
            Convention::Yzx231 => "231",
        }
    }

    fn sequence(self) -> Sequence {
        match self {
            Convention::Zyx321 => Sequence([Axis::Z, Axis::Y, Axis::X]),
            Convention::Yzx231 => Sequence([Axis::Y, Axis::Z, Axis::X]),
        }
    }

    /// Position of each stored angle (pitch, yaw, roll) within the sequence.
    fn slots(self) -> [usize; 3] {
        match self {
            Convention::Zyx321 => [1, 0, 2],
            Convention::Yzx231 => [0, 1, 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
    pub convention: Convention,
}

impl EulerAngles {
    pub fn new(pitch: f64, yaw: f64, roll: f64, convention: Convention) -> Self {
        Self {
            pitch,
            yaw,
            roll,
            convention,
        }
    }

    pub fn zyx(pitch: f64, yaw: f64, roll: f64) -> Self {
        Self::new(pitch, yaw, roll, Convention::Zyx321)
    }

    pub fn zero(convention: Convention) -> Self {
        Self::new(0.0, 0.0, 0.0, convention)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pitch, self.yaw, self.roll]
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.pitch, self.yaw, self.roll)
    }

    fn sequence_angles(&self) -> [f64; 3] {
        to_sequence_order(self.convention, self.as_array())
    }

    /// The second rotation of the sequence, whose magnitude approaches pi/2
    /// at the pole.
    pub fn pole_angle(&self) -> f64 {
        self.sequence_angles()[1]
    }

    /// Distance (rad) from the active convention's pole.
    pub fn pole_distance(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 - self.pole_angle().abs()
    }

    pub fn near_pole(&self, threshold: f64) -> bool {
        self.pole_angle().abs() > threshold
    }

    /// Extract angles of the given convention from a proper rotation matrix.
    pub fn from_rotation(r: &Matrix3<f64>, convention: Convention) -> Self {
        match convention {
            Convention::Zyx321 => {
                let pitch = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
                let yaw = r[(1, 0)].atan2(r[(0, 0)]);
                let roll = r[(2, 1)].atan2(r[(2, 2)]);
                Self::new(pitch, yaw, roll, convention)
            }
            Convention::Yzx231 => {
                let yaw = r[(1, 0)].clamp(-1.0, 1.0).asin();
                let pitch = (-r[(2, 0)]).atan2(r[(0, 0)]);
                let roll = (-r[(1, 2)]).atan2(r[(1, 1)]);
                Self::new(pitch, yaw, roll, convention)
            }
        }
    }
}

fn to_sequence_order(convention: Convention, stored: [f64; 3]) -> [f64; 3] {
    let slots = convention.slots();
    let mut seq = [0.0; 3];
    for (i, &slot) in slots.iter().enumerate() {
        seq[slot] = stored[i];
    }
    seq
}

/// `R_{E/B}`: rotates body-frame components into the earth frame.
pub fn rotation_from_euler(angles: &EulerAngles) -> Matrix3<f64> {
    angles
        .convention
        .sequence()
        .rotation(angles.sequence_angles())
}

/// The rate map `Omega` with `omega_body = Omega * [pitch_rate, yaw_rate, roll_rate]`.
///
/// Columns follow the stored `[pitch, yaw, roll]` order, so at zero angles the
/// map is the axis permutation pitch -> y, yaw -> z, roll -> x.
pub fn rate_map_unchecked(angles: &EulerAngles) -> Matrix3<f64> {
    let seq = angles.convention.sequence();
    let q = angles.sequence_angles();
    let r = seq.rotation(q);
    let parent = seq.parent_rate_matrix(q);
    let slots = angles.convention.slots();
    let mut omega = Matrix3::zeros();
    for (i, &slot) in slots.iter().enumerate() {
        omega.set_column(i, &(r.transpose() * parent.column(slot)));
    }
    omega
}

/// Rate map with a singularity check at the pole.
pub fn rate_map(angles: &EulerAngles) -> Result<Matrix3<f64>> {
    let omega = rate_map_unchecked(angles);
    let det = omega.determinant();
    if det.abs() < POLE_DET_TOL {
        return Err(Error::SingularPole { det });
    }
    Ok(omega)
}

/// Velocity-product part of the body angular acceleration, `dOmega/dt * rates`.
pub fn rate_map_derivative_product(angles: &EulerAngles, rates: &Vector3<f64>) -> Vector3<f64> {
    let seq = angles.convention.sequence();
    let q = angles.sequence_angles();
    let qd = to_sequence_order(angles.convention, [rates.x, rates.y, rates.z]);
    let r = seq.rotation(q);
    r.transpose() * seq.parent_rate_product(q, qd)
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub(crate) fn unit(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }

    pub(crate) fn rotation(self, angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        match self {
            Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
            Axis::Y => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
            Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        }
    }
}

/// Three elementary rotations composed as `R = R_a(q0) R_b(q1) R_c(q2)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sequence(pub(crate) [Axis; 3]);

impl Sequence {
    pub(crate) fn rotation(&self, q: [f64; 3]) -> Matrix3<f64> {
        self.0[0].rotation(q[0]) * self.0[1].rotation(q[1]) * self.0[2].rotation(q[2])
    }

    /// Columns map sequence-ordered angle rates to the angular velocity of
    /// the rotated frame, resolved in the parent frame.
    pub(crate) fn parent_rate_matrix(&self, q: [f64; 3]) -> Matrix3<f64> {
        let a = self.0[0].rotation(q[0]);
        let ab = a * self.0[1].rotation(q[1]);
        Matrix3::from_columns(&[
            self.0[0].unit(),
            a * self.0[1].unit(),
            ab * self.0[2].unit(),
        ])
    }

    /// Time derivative of the parent-frame angular velocity with zero angle
    /// accelerations.
    pub(crate) fn parent_rate_product(&self, q: [f64; 3], qd: [f64; 3]) -> Vector3<f64> {
        let a = self.0[0].rotation(q[0]);
        let b = self.0[1].rotation(q[1]);
        let e0 = self.0[0].unit();
        let e1 = self.0[1].unit();
        let e2 = self.0[2].unit();
        let w1 = a * e1 * qd[1];
        let w2 = a * b * e2 * qd[2];
        (e0 * qd[0]).cross(&(w1 + w2)) + a * (e1 * qd[1]).cross(&(b * e2 * qd[2]))
    }
}

/// Skew-symmetric cross-product matrix.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
