//! Per-body kinematics of the multibody airframe.

use nalgebra::{Matrix3, Vector3};

use super::config::{AirframeConfig, BodyGroup, Side};
use super::euler::{rate_map_unchecked, rotation_from_euler, Axis, Sequence};
use super::state::AircraftState;
use crate::controls::{ControlVector, MorphRates, WingAngles};

const MIRROR: Matrix3<f64> = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0);
const WING_SEQUENCE: Sequence = Sequence([Axis::Z, Axis::Y, Axis::X]);

/// Prescribed pose of one wing relative to the fuselage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WingPose {
    pub side: Side,
    pub tau: WingAngles,
    pub tau_rate: WingAngles,
    pub tau_accel: WingAngles,
}

impl WingPose {
    pub fn fixed(side: Side, tau: WingAngles) -> Self {
        Self {
            side,
            tau,
            tau_rate: WingAngles::default(),
            tau_accel: WingAngles::default(),
        }
    }

    /// `R_{B/W}`: wing-element components to body components.
    pub fn rotation(&self) -> Matrix3<f64> {
        let r = WING_SEQUENCE.rotation(right_sequence_angles(&self.tau));
        match self.side {
            Side::Right => r,
            Side::Left => MIRROR * r * MIRROR,
        }
    }

    /// Angular velocity of the wing relative to the fuselage, body frame.
    pub fn relative_rate(&self) -> Vector3<f64> {
        let q = right_sequence_angles(&self.tau);
        let qd = right_sequence_angles(&self.tau_rate);
        let w = WING_SEQUENCE.parent_rate_matrix(q) * Vector3::from(qd);
        self.reflect_rate(w)
    }

    /// Body-frame time derivative of [`Self::relative_rate`].
    pub fn relative_accel(&self) -> Vector3<f64> {
        let q = right_sequence_angles(&self.tau);
        let qd = right_sequence_angles(&self.tau_rate);
        let qdd = right_sequence_angles(&self.tau_accel);
        let w = WING_SEQUENCE.parent_rate_matrix(q) * Vector3::from(qdd)
            + WING_SEQUENCE.parent_rate_product(q, qd);
        self.reflect_rate(w)
    }

    fn reflect_rate(&self, w: Vector3<f64>) -> Vector3<f64> {
        match self.side {
            Side::Right => w,
            // angular velocity is a pseudovector under the mirror
            Side::Left => -(MIRROR * w),
        }
    }
}

/// Right-wing sequence angles `[sweep, incidence, -dihedral]` so that positive
/// dihedral raises the tip.
fn right_sequence_angles(t: &WingAngles) -> [f64; 3] {
    [t.sweep, t.incidence, -t.dihedral]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WingPoses {
    pub left: WingPose,
    pub right: WingPose,
}

impl WingPoses {
    pub fn from_controls(controls: &ControlVector, rates: &MorphRates) -> Self {
        let pose = |side: Side| WingPose {
            side,
            tau: *controls.wing(side),
            tau_rate: rates.rate(side),
            tau_accel: rates.accel(side),
        };
        Self {
            left: pose(Side::Left),
            right: pose(Side::Right),
        }
    }

    pub fn neutral() -> Self {
        Self {
            left: WingPose::fixed(Side::Left, WingAngles::default()),
            right: WingPose::fixed(Side::Right, WingAngles::default()),
        }
    }

    pub fn get(&self, side: Side) -> &WingPose {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

/// Earth-frame position, velocity and angular velocity of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyMotion {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

/// Body-frame geometry of one element at the current morphing pose.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ElementFrame {
    pub mass: f64,
    /// Inertia about the element CoM in body-frame components.
    pub inertia_b: Matrix3<f64>,
    /// CoM relative to S.
    pub com: Vector3<f64>,
    /// Morphing lever from the rotation origin (H for wings) to the CoM.
    pub lever: Vector3<f64>,
    pub rel_rate: Vector3<f64>,
    pub rel_accel: Vector3<f64>,
}

pub(crate) fn element_frames(config: &AirframeConfig, wings: &WingPoses) -> Vec<ElementFrame> {
    config
        .bodies
        .iter()
        .map(|b| {
            let inertia = b.inertia_matrix();
            match (b.group, b.side) {
                (BodyGroup::Wing, Some(side)) => {
                    let pose = wings.get(side);
                    let rot = pose.rotation();
                    let lever = rot * b.com();
                    ElementFrame {
                        mass: b.mass,
                        inertia_b: rot * inertia * rot.transpose(),
                        com: config.wing_root_for(side) + lever,
                        lever,
                        rel_rate: pose.relative_rate(),
                        rel_accel: pose.relative_accel(),
                    }
                }
                _ => ElementFrame {
                    mass: b.mass,
                    inertia_b: inertia,
                    com: b.com(),
                    lever: Vector3::zeros(),
                    rel_rate: Vector3::zeros(),
                    rel_accel: Vector3::zeros(),
                },
            }
        })
        .collect()
}

/// Position, velocity and angular velocity of every element, earth frame,
/// in the order of `config.bodies`.
pub fn body_kinematics(
    config: &AirframeConfig,
    state: &AircraftState,
    wings: &WingPoses,
) -> Vec<BodyMotion> {
    let r = rotation_from_euler(&state.euler);
    let omega = rate_map_unchecked(&state.euler) * state.euler_rates;
    let v_b = r.transpose() * state.vel;
    element_frames(config, wings)
        .iter()
        .map(|e| {
            let u = v_b + omega.cross(&e.com) + e.rel_rate.cross(&e.lever);
            BodyMotion {
                position: state.pos + r * e.com,
                velocity: r * u,
                angular_velocity: r * (omega + e.rel_rate),
            }
        })
        .collect()
}

/// Total kinetic energy of the multibody system.
pub fn kinetic_energy(config: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> f64 {
    let r = rotation_from_euler(&state.euler);
    let frames = element_frames(config, wings);
    body_kinematics(config, state, wings)
        .iter()
        .zip(&frames)
        .map(|(m, e)| {
            let inertia_e = r * e.inertia_b * r.transpose();
            0.5 * e.mass * m.velocity.norm_squared()
                + 0.5 * m.angular_velocity.dot(&(inertia_e * m.angular_velocity))
        })
        .sum()
}

/// Gravitational potential energy (earth z points down).
pub fn potential_energy(config: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> f64 {
    body_kinematics(config, state, wings)
        .iter()
        .zip(&config.bodies)
        .map(|(m, b)| -b.mass * config.gravity * m.position.z)
        .sum()
}

/// Total linear momentum and angular momentum about the earth origin.
pub fn momenta(
    config: &AirframeConfig,
    state: &AircraftState,
    wings: &WingPoses,
) -> (Vector3<f64>, Vector3<f64>) {
    let r = rotation_from_euler(&state.euler);
    let frames = element_frames(config, wings);
    let mut p = Vector3::zeros();
    let mut h = Vector3::zeros();
    for (m, e) in body_kinematics(config, state, wings).iter().zip(&frames) {
        let inertia_e = r * e.inertia_b * r.transpose();
        p += e.mass * m.velocity;
        h += m.position.cross(&(e.mass * m.velocity)) + inertia_e * m.angular_velocity;
    }
    (p, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airframe::euler::EulerAngles;
    use approx::assert_relative_eq;

    fn config() -> AirframeConfig {
        AirframeConfig::case_study()
    }

    #[test]
    fn pure_translation_moves_every_body_equally() {
        let cfg = config();
        let state = AircraftState::trim_layout(25.0, 0.0, 0.0, 0.0);
        for m in body_kinematics(&cfg, &state, &WingPoses::neutral()) {
            assert_relative_eq!(m.velocity, Vector3::new(25.0, 0.0, 0.0), epsilon = 1e-14);
            assert_relative_eq!(m.angular_velocity, Vector3::zeros(), epsilon = 1e-14);
        }
    }

    #[test]
    fn yaw_rotation_speed_is_rate_times_lever() {
        let cfg = config();
        let mut state = AircraftState::trim_layout(0.0, 0.0, 0.0, 0.0);
        // yaw rate maps to body z at zero attitude
        state.euler_rates = Vector3::new(0.0, 0.7, 0.0);
        let motions = body_kinematics(&cfg, &state, &WingPoses::neutral());
        let balance = cfg.bodies.iter().position(|b| b.id == "balance").unwrap();
        let r = cfg.bodies[balance].com().x;
        assert_relative_eq!(motions[balance].velocity.norm(), 0.7 * r, epsilon = 1e-14);
    }

    #[test]
    fn positive_dihedral_raises_both_tips() {
        let tau = WingAngles::new(0.0, 0.0, 0.3);
        let right = WingPose::fixed(Side::Right, tau).rotation() * Vector3::new(0.0, 1.0, 0.0);
        let left = WingPose::fixed(Side::Left, tau).rotation() * Vector3::new(0.0, -1.0, 0.0);
        assert!(right.z < 0.0 && left.z < 0.0);
        assert_relative_eq!(right.z, left.z, epsilon = 1e-15);
        assert_relative_eq!(right.y, -left.y, epsilon = 1e-15);
    }

    #[test]
    fn positive_sweep_moves_tips_aft_and_incidence_raises_leading_edge() {
        let tau = WingAngles::new(0.3, 0.2, 0.0);
        for (side, span) in [(Side::Right, 1.0), (Side::Left, -1.0)] {
            let rot = WingPose::fixed(side, tau).rotation();
            assert!((rot * Vector3::new(0.0, span, 0.0)).x < 0.0);
            assert!((rot * Vector3::x()).z < 0.0);
        }
    }

    #[test]
    fn wing_rate_matches_orientation_finite_difference() {
        let tau = WingAngles::new(0.3, -0.4, 0.5);
        let rate = WingAngles::new(0.7, 0.2, -0.9);
        for side in [Side::Left, Side::Right] {
            let pose = WingPose {
                side,
                tau,
                tau_rate: rate,
                tau_accel: WingAngles::default(),
            };
            let h = 1e-6;
            let at = |s: f64| {
                let t = WingAngles::new(
                    tau.sweep + s * rate.sweep,
                    tau.incidence + s * rate.incidence,
                    tau.dihedral + s * rate.dihedral,
                );
                WingPose::fixed(side, t).rotation()
            };
            let rdot = (at(h) - at(-h)) / (2.0 * h);
            let w = rdot * pose.rotation().transpose();
            let w_fd = Vector3::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
            assert_relative_eq!(w_fd, pose.relative_rate(), epsilon = 1e-8);
        }
    }

    #[test]
    fn wing_earth_angular_velocity_matches_fd() {
        let cfg = config();
        let mut state = AircraftState::trim_layout(0.0, 0.3, -0.2, 0.1);
        state.euler = EulerAngles::zyx(0.3, -0.2, 0.1);
        let tau = WingAngles::new(0.2, 0.1, -0.3);
        let rate = WingAngles::new(-0.5, 0.8, 0.4);
        let wings = WingPoses {
            left: WingPose::fixed(Side::Left, tau),
            right: WingPose {
                side: Side::Right,
                tau,
                tau_rate: rate,
                tau_accel: WingAngles::default(),
            },
        };
        let idx = cfg.wing_index(Side::Right).unwrap();
        let omega = body_kinematics(&cfg, &state, &wings)[idx].angular_velocity;
        let r_e = rotation_from_euler(&state.euler);
        let orient = |s: f64| {
            let t = WingAngles::new(
                tau.sweep + s * rate.sweep,
                tau.incidence + s * rate.incidence,
                tau.dihedral + s * rate.dihedral,
            );
            r_e * WingPose::fixed(Side::Right, t).rotation()
        };
        let h = 1e-6;
        let w = (orient(h) - orient(-h)) / (2.0 * h) * orient(0.0).transpose();
        let w_fd = Vector3::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
        assert_relative_eq!(omega, w_fd, epsilon = 1e-8);
    }

    #[test]
    fn kinetic_energy_of_translation() {
        let cfg = config();
        let state = AircraftState::trim_layout(12.0, 0.4, 0.2, -0.3);
        let k = kinetic_energy(&cfg, &state, &WingPoses::neutral());
        assert_relative_eq!(k, 0.5 * 8.0 * 144.0, max_relative = 1e-14);
        let rest = AircraftState::trim_layout(0.0, 0.4, 0.2, -0.3);
        assert_eq!(kinetic_energy(&cfg, &rest, &WingPoses::neutral()), 0.0);
    }
}
