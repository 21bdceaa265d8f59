//! Flight dynamics of a morphing-wing aircraft: multibody equations of motion,
//! strip aerodynamics, trim-space continuation, stability analysis, quasistatic
//! nose-pointing maneuver schedules and reduced-frequency spectral checks.

pub mod aero;
mod aircraft;
pub mod airframe;
pub mod controls;
pub mod error;
pub mod exec;
pub mod guidance;
pub mod sim;
pub mod spectral;
pub mod stability;
pub mod trim;

pub use aircraft::{state_derivative, Aircraft};
pub use error::{Error, Result};
