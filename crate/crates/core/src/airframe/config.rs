//! Airframe description and its TOML file format.

use std::path::Path;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The shipped case-study aircraft (8 kg, 1.6 m span, 1 kg per wing).
pub const CASE_STUDY_TOML: &str = include_str!("../../data/case_study.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyGroup {
    Fuselage,
    Wing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn mirror(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

/// Control surfaces that shift a station's effective angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceControl {
    Elevator,
    Rudder,
    Aileron,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlBinding {
    pub control: SurfaceControl,
    /// Effective-angle shift per radian of deflection (builtin model only).
    #[serde(default = "default_effectiveness")]
    pub effectiveness: f64,
    /// Deflection sign seen by this surface (ailerons deflect antisymmetrically).
    #[serde(default = "one")]
    pub sign: f64,
}

fn default_effectiveness() -> f64 {
    0.6
}

fn one() -> f64 {
    1.0
}

/// A lifting surface discretized into spanwise strips.
///
/// Vectors are in the element frame at zero morphing; for wing elements they
/// are measured from the wing root H, otherwise from the reference point S.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeroSurfaceDescriptor {
    /// Quarter-chord point at the start of the span.
    pub root: [f64; 3],
    /// Direction along which the span extends from `root`.
    pub span_axis: [f64; 3],
    /// Leading-edge direction of the section.
    pub chord_axis: [f64; 3],
    /// Section normal on the suction side for positive angle of attack.
    pub normal_axis: [f64; 3],
    pub span: f64,
    /// Chord at the root; `chord_tip` defaults to the same value.
    pub chord: f64,
    #[serde(default)]
    pub chord_tip: Option<f64>,
    pub stations: usize,
    #[serde(default = "builtin_table")]
    pub table: String,
    #[serde(default)]
    pub control: Option<ControlBinding>,
}

fn builtin_table() -> String {
    "builtin".to_string()
}

/// Cylindrical fuselage drag strips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuselageDragDescriptor {
    /// Start point of the fuselage axis relative to S.
    pub start: [f64; 3],
    pub axis: [f64; 3],
    pub length: f64,
    pub radius: f64,
    pub stations: usize,
    #[serde(default = "default_cd0")]
    pub cd0: f64,
    #[serde(default = "default_cd_cross")]
    pub cd_cross: f64,
}

fn default_cd0() -> f64 {
    0.05
}

fn default_cd_cross() -> f64 {
    1.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidBodyElement {
    pub id: String,
    pub group: BodyGroup,
    /// Required for wing elements.
    #[serde(default)]
    pub side: Option<Side>,
    pub mass: f64,
    /// Inertia about the element's center of mass, element frame.
    #[serde(default)]
    pub inertia: [[f64; 3]; 3],
    /// Center-of-mass location: from S for fuselage elements, from H for wings.
    pub com_offset: [f64; 3],
    /// Point masses may carry a zero inertia tensor.
    #[serde(default)]
    pub point: bool,
    #[serde(default)]
    pub surface: Option<AeroSurfaceDescriptor>,
    #[serde(default)]
    pub fuselage_drag: Option<FuselageDragDescriptor>,
}

impl RigidBodyElement {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.inertia[i][j])
    }

    pub fn com(&self) -> Vector3<f64> {
        Vector3::from(self.com_offset)
    }
}

/// `[min, max]` bounds for every control channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    pub thrust: [f64; 2],
    pub elevator: [f64; 2],
    pub rudder: [f64; 2],
    pub aileron: [f64; 2],
    pub sweep: [f64; 2],
    pub incidence: [f64; 2],
    pub dihedral: [f64; 2],
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self {
            thrust: [0.0, f64::INFINITY],
            elevator: [-0.87, 0.87],
            rudder: [-0.87, 0.87],
            aileron: [-0.87, 0.87],
            sweep: [-0.8, 0.8],
            incidence: [-0.8, 0.8],
            dihedral: [-0.8, 0.8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrustLine {
    pub direction: [f64; 3],
    pub point: [f64; 3],
}

impl Default for ThrustLine {
    fn default() -> Self {
        Self {
            direction: [1.0, 0.0, 0.0],
            point: [0.0, 0.0, 0.0],
        }
    }
}

/// Parameters of the builtin full-range flat-plate section model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatPlateParams {
    #[serde(default = "default_stall")]
    pub stall_angle: f64,
    #[serde(default = "default_blend")]
    pub blend_width: f64,
    #[serde(default = "default_cd_min")]
    pub cd_min: f64,
    #[serde(default = "default_plate_cd")]
    pub cd_plate: f64,
    #[serde(default = "default_plate_cl")]
    pub cl_plate: f64,
}

fn default_stall() -> f64 {
    12f64.to_radians()
}

fn default_blend() -> f64 {
    5f64.to_radians()
}

fn default_cd_min() -> f64 {
    0.02
}

fn default_plate_cd() -> f64 {
    1.1
}

fn default_plate_cl() -> f64 {
    1.1
}

impl Default for FlatPlateParams {
    fn default() -> Self {
        Self {
            stall_angle: default_stall(),
            blend_width: default_blend(),
            cd_min: default_cd_min(),
            cd_plate: default_plate_cd(),
            cl_plate: default_plate_cl(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRef {
    pub id: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirframeConfig {
    #[serde(default)]
    pub name: String,
    /// Wing root H relative to S (the right wing; the left root is mirrored).
    pub wing_root: [f64; 3],
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    #[serde(default = "default_density")]
    pub air_density: f64,
    #[serde(default)]
    pub limits: ControlLimits,
    #[serde(default)]
    pub thrust: ThrustLine,
    #[serde(default)]
    pub flat_plate: FlatPlateParams,
    #[serde(default)]
    pub tables: Vec<TableRef>,
    pub bodies: Vec<RigidBodyElement>,
}

fn default_gravity() -> f64 {
    9.81
}

fn default_density() -> f64 {
    1.225
}

impl AirframeConfig {
    /// The shipped case-study aircraft.
    pub fn case_study() -> Self {
        Self::from_toml_str(CASE_STUDY_TOML).expect("shipped case-study config is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.mass).sum()
    }

    pub fn wing_root_for(&self, side: Side) -> Vector3<f64> {
        let h = Vector3::from(self.wing_root);
        match side {
            Side::Right => h,
            Side::Left => Vector3::new(h.x, -h.y, h.z),
        }
    }

    /// Center of mass relative to S with wings at zero morphing.
    pub fn neutral_com(&self) -> Vector3<f64> {
        let mut acc = Vector3::zeros();
        for b in &self.bodies {
            let p = match (b.group, b.side) {
                (BodyGroup::Wing, Some(side)) => self.wing_root_for(side) + b.com(),
                _ => b.com(),
            };
            acc += p * b.mass;
        }
        acc / self.total_mass()
    }

    pub fn wing_index(&self, side: Side) -> Option<usize> {
        self.bodies
            .iter()
            .position(|b| b.group == BodyGroup::Wing && b.side == Some(side))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.bodies.is_empty() {
            return bad("no rigid bodies defined".into());
        }
        for b in &self.bodies {
            if !(b.mass > 0.0) || !b.mass.is_finite() {
                return bad(format!("body `{}` has non-positive mass", b.id));
            }
            let i = b.inertia_matrix();
            if (i - i.transpose()).norm() > 1e-12 * (1.0 + i.norm()) {
                return bad(format!("body `{}` inertia is not symmetric", b.id));
            }
            let eig = SymmetricEigen::new(i).eigenvalues;
            let min = eig.min();
            if b.point {
                if min < -1e-15 {
                    return bad(format!("point mass `{}` inertia is not PSD", b.id));
                }
            } else if min <= 0.0 {
                return bad(format!("body `{}` inertia is not positive definite", b.id));
            }
            if b.group == BodyGroup::Wing && b.side.is_none() {
                return bad(format!("wing `{}` has no side", b.id));
            }
            if let Some(s) = &b.surface {
                if s.stations == 0 {
                    return bad(format!("surface on `{}` has no stations", b.id));
                }
                if !(s.chord > 0.0) || s.chord_tip.is_some_and(|c| !(c > 0.0)) {
                    return bad(format!("surface on `{}` has non-positive chord", b.id));
                }
                for (name, v) in [
                    ("span_axis", s.span_axis),
                    ("chord_axis", s.chord_axis),
                    ("normal_axis", s.normal_axis),
                ] {
                    let n = Vector3::from(v).norm();
                    if (n - 1.0).abs() > 1e-9 {
                        return bad(format!("`{}` {name} is not a unit vector", b.id));
                    }
                }
            }
            if let Some(d) = &b.fuselage_drag {
                if d.stations == 0 || !(d.length > 0.0) || !(d.radius > 0.0) {
                    return bad(format!("fuselage drag on `{}` is degenerate", b.id));
                }
            }
        }
        for side in [Side::Left, Side::Right] {
            let n = self
                .bodies
                .iter()
                .filter(|b| b.group == BodyGroup::Wing && b.side == Some(side))
                .count();
            if n != 1 {
                return bad(format!("expected exactly one {side:?} wing, found {n}"));
            }
        }
        if !self
            .bodies
            .iter()
            .any(|b| b.group == BodyGroup::Fuselage && b.fuselage_drag.is_some())
        {
            return bad("no fuselage element carries a drag descriptor".into());
        }
        let l = &self.limits;
        for (name, [lo, hi]) in [
            ("thrust", l.thrust),
            ("elevator", l.elevator),
            ("rudder", l.rudder),
            ("aileron", l.aileron),
            ("sweep", l.sweep),
            ("incidence", l.incidence),
            ("dihedral", l.dihedral),
        ] {
            if !(lo < hi) {
                return bad(format!("control limit `{name}` has min >= max"));
            }
        }
        if !(self.air_density >= 0.0) || !(self.gravity >= 0.0) {
            return bad("density and gravity must be non-negative".into());
        }
        let dir = Vector3::from(self.thrust.direction);
        if (dir.norm() - 1.0).abs() > 1e-9 {
            return bad("thrust direction is not a unit vector".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_study_mass_budget() {
        let cfg = AirframeConfig::case_study();
        assert!((cfg.total_mass() - 8.0).abs() < 1e-12);
        for side in [Side::Left, Side::Right] {
            let w = &cfg.bodies[cfg.wing_index(side).unwrap()];
            assert!((w.mass - 1.0).abs() < 1e-12);
        }
        assert_eq!(cfg.limits.elevator, [-0.87, 0.87]);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = AirframeConfig::case_study();
        let text = cfg.to_toml_string().unwrap();
        let back = AirframeConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_missing_wing() {
        let mut cfg = AirframeConfig::case_study();
        let idx = cfg.wing_index(Side::Left).unwrap();
        cfg.bodies.remove(idx);
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn rejects_bad_limits_and_mass() {
        let mut cfg = AirframeConfig::case_study();
        cfg.limits.elevator = [0.5, 0.5];
        assert!(cfg.validate().is_err());
        let mut cfg = AirframeConfig::case_study();
        cfg.bodies[0].mass = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn point_mass_may_have_zero_inertia() {
        let cfg = AirframeConfig::case_study();
        assert!(cfg.bodies.iter().any(|b| b.point));
        let mut cfg2 = cfg.clone();
        let i = cfg2.bodies.iter().position(|b| b.point).unwrap();
        cfg2.bodies[i].point = false;
        assert!(cfg2.validate().is_err());
    }
}
