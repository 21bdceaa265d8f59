//! Multibody airframe: configuration, attitude kinematics and equations of motion.

mod config;
mod eom;
mod euler;
mod kinematics;
mod state;

pub use config::{
    AeroSurfaceDescriptor, AirframeConfig, BodyGroup, ControlBinding, ControlLimits,
    FlatPlateParams, FuselageDragDescriptor, RigidBodyElement, Side, SurfaceControl, TableRef,
    ThrustLine, CASE_STUDY_TOML,
};
pub use eom::{assemble_eom, state_derivative_with_loads, EomCoefficients, MAX_MASS_CONDITION};
pub use euler::{
    rate_map, rate_map_derivative_product, rate_map_unchecked, rotation_from_euler, skew,
    Convention, EulerAngles, POLE_DET_TOL,
};
pub use kinematics::{
    body_kinematics, kinetic_energy, momenta, potential_energy, BodyMotion, WingPose, WingPoses,
};
pub use state::{convention_switch, to_convention, AircraftState, StateVector};

pub(crate) use kinematics::element_frames;
