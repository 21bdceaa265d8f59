//! Control and morphing parameters.

use serde::{Deserialize, Serialize};

use crate::airframe::{ControlLimits, Side};

/// Wing rotation relative to the fuselage, applied as sweep (z), incidence
/// (y), then dihedral (x). Positive sweep moves the tip aft, positive
/// incidence raises the leading edge and positive dihedral raises the tip,
/// on either side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WingAngles {
    pub sweep: f64,
    pub incidence: f64,
    pub dihedral: f64,
}

impl WingAngles {
    pub fn new(sweep: f64, incidence: f64, dihedral: f64) -> Self {
        Self {
            sweep,
            incidence,
            dihedral,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sweep, self.incidence, self.dihedral]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(self.sweep * k, self.incidence * k, self.dihedral * k)
    }
}

/// Identifies one scalar entry of a [`ControlVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlId {
    Thrust,
    Elevator,
    Rudder,
    Aileron,
    Sweep(Side),
    Incidence(Side),
    Dihedral(Side),
}

impl ControlId {
    pub const ALL: [ControlId; 10] = [
        ControlId::Thrust,
        ControlId::Elevator,
        ControlId::Rudder,
        ControlId::Aileron,
        ControlId::Sweep(Side::Left),
        ControlId::Incidence(Side::Left),
        ControlId::Dihedral(Side::Left),
        ControlId::Sweep(Side::Right),
        ControlId::Incidence(Side::Right),
        ControlId::Dihedral(Side::Right),
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }

    pub fn name(self) -> String {
        match self {
            ControlId::Thrust => "thrust".into(),
            ControlId::Elevator => "elevator".into(),
            ControlId::Rudder => "rudder".into(),
            ControlId::Aileron => "aileron".into(),
            ControlId::Sweep(s) => format!("sweep_{}", s.suffix()),
            ControlId::Incidence(s) => format!("inc_{}", s.suffix()),
            ControlId::Dihedral(s) => format!("dih_{}", s.suffix()),
        }
    }

    pub fn limits(self, limits: &ControlLimits) -> [f64; 2] {
        match self {
            ControlId::Thrust => limits.thrust,
            ControlId::Elevator => limits.elevator,
            ControlId::Rudder => limits.rudder,
            ControlId::Aileron => limits.aileron,
            ControlId::Sweep(_) => limits.sweep,
            ControlId::Incidence(_) => limits.incidence,
            ControlId::Dihedral(_) => limits.dihedral,
        }
    }

    /// Image of this control under the left/right mirror.
    pub fn mirrored(self) -> Self {
        match self {
            ControlId::Sweep(s) => ControlId::Sweep(s.mirror()),
            ControlId::Incidence(s) => ControlId::Incidence(s.mirror()),
            ControlId::Dihedral(s) => ControlId::Dihedral(s.mirror()),
            other => other,
        }
    }
}

/// Thrust, control-surface deflections and both wings' Euler angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlVector {
    pub thrust: f64,
    pub elevator: f64,
    pub rudder: f64,
    pub aileron: f64,
    pub left: WingAngles,
    pub right: WingAngles,
    /// Entries a solver may modify, indexed by [`ControlId::index`].
    #[serde(default)]
    pub free_mask: [bool; 10],
}

impl Default for ControlVector {
    fn default() -> Self {
        Self {
            thrust: 0.0,
            elevator: 0.0,
            rudder: 0.0,
            aileron: 0.0,
            left: WingAngles::default(),
            right: WingAngles::default(),
            free_mask: [false; 10],
        }
    }
}

impl ControlVector {
    pub fn wing(&self, side: Side) -> &WingAngles {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn wing_mut(&mut self, side: Side) -> &mut WingAngles {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    pub fn get(&self, id: ControlId) -> f64 {
        match id {
            ControlId::Thrust => self.thrust,
            ControlId::Elevator => self.elevator,
            ControlId::Rudder => self.rudder,
            ControlId::Aileron => self.aileron,
            ControlId::Sweep(s) => self.wing(s).sweep,
            ControlId::Incidence(s) => self.wing(s).incidence,
            ControlId::Dihedral(s) => self.wing(s).dihedral,
        }
    }

    pub fn set(&mut self, id: ControlId, value: f64) {
        match id {
            ControlId::Thrust => self.thrust = value,
            ControlId::Elevator => self.elevator = value,
            ControlId::Rudder => self.rudder = value,
            ControlId::Aileron => self.aileron = value,
            ControlId::Sweep(s) => self.wing_mut(s).sweep = value,
            ControlId::Incidence(s) => self.wing_mut(s).incidence = value,
            ControlId::Dihedral(s) => self.wing_mut(s).dihedral = value,
        }
    }

    pub fn is_free(&self, id: ControlId) -> bool {
        self.free_mask[id.index()]
    }

    pub fn values(&self) -> [f64; 10] {
        ControlId::ALL.map(|id| self.get(id))
    }

    /// Left/right mirror image: lateral deflections negate, wings swap.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        out.rudder = -self.rudder;
        out.aileron = -self.aileron;
        out.left = self.right;
        out.right = self.left;
        for id in ControlId::ALL {
            out.free_mask[id.mirrored().index()] = self.free_mask[id.index()];
        }
        out
    }

    /// Linear interpolation `self + s (other - self)`; the free mask of `self` is kept.
    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        let mut out = self.clone();
        for id in ControlId::ALL {
            let a = self.get(id);
            out.set(id, a + s * (other.get(id) - a));
        }
        out
    }
}

/// Wing Euler-angle rates and accelerations (perfect actuators).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MorphRates {
    pub left_rate: WingAngles,
    pub right_rate: WingAngles,
    pub left_accel: WingAngles,
    pub right_accel: WingAngles,
}

impl MorphRates {
    pub fn rate(&self, side: Side) -> WingAngles {
        match side {
            Side::Left => self.left_rate,
            Side::Right => self.right_rate,
        }
    }

    pub fn accel(&self, side: Side) -> WingAngles {
        match side {
            Side::Left => self.left_accel,
            Side::Right => self.right_accel,
        }
    }
}
