use nalgebra::Vector3;

use crate::airframe::{AirframeConfig, BodyGroup, ControlBinding, Side};
use crate::error::{Error, Result};

/// One spanwise strip of a lifting surface.
///
/// Geometry is in the parent element frame at zero morphing: from the wing
/// root for wing stations, from S otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroStation {
    pub body: usize,
    pub body_id: String,
    /// Set for stations that move with a morphing wing.
    pub wing: Option<Side>,
    /// Index within its surface, root to tip.
    pub index: usize,
    /// Distance of the strip midpoint from the surface root.
    pub spanwise: f64,
    pub semichord: f64,
    /// Strip width along the span.
    pub width: f64,
    pub quarter_chord: Vector3<f64>,
    pub span_axis: Vector3<f64>,
    pub chord_axis: Vector3<f64>,
    pub normal_axis: Vector3<f64>,
    pub table_id: String,
    /// Index into the aircraft's coefficient models.
    pub table: usize,
    pub control: Option<ControlBinding>,
}

impl AeroStation {
    /// `body_id:index`, the name used for probes.
    pub fn label(&self) -> String {
        format!("{}:{}", self.body_id, self.index)
    }
}

/// One axial strip of a cylindrical fuselage.
#[derive(Debug, Clone, PartialEq)]
pub struct DragStrip {
    pub body: usize,
    pub index: usize,
    /// Strip center relative to S.
    pub center: Vector3<f64>,
    pub axis: Vector3<f64>,
    pub radius: f64,
    pub width: f64,
    pub cd0: f64,
    pub cd_cross: f64,
}

/// Midpoint-rule stations for every lifting surface.
///
/// `density` overrides the per-surface station count from the config.
/// Coefficient model indices are left at zero; see [`crate::Aircraft`].
pub fn build_stations(config: &AirframeConfig, density: Option<usize>) -> Result<Vec<AeroStation>> {
    let mut out = Vec::new();
    for (body, element) in config.bodies.iter().enumerate() {
        let Some(surface) = &element.surface else {
            continue;
        };
        if !(surface.span > 0.0) {
            return Err(Error::ZeroSpan(element.id.clone()));
        }
        let n = density.unwrap_or(surface.stations);
        if n == 0 {
            return Err(Error::InvalidConfig(format!(
                "{}: station count must be positive",
                element.id
            )));
        }
        let wing = match element.group {
            BodyGroup::Wing => element.side,
            BodyGroup::Fuselage => None,
        };
        let width = surface.span / n as f64;
        let root = Vector3::from(surface.root);
        let span_axis = Vector3::from(surface.span_axis);
        let chord_tip = surface.chord_tip.unwrap_or(surface.chord);
        for k in 0..n {
            let s = (k as f64 + 0.5) * width;
            let chord = surface.chord + (chord_tip - surface.chord) * s / surface.span;
            out.push(AeroStation {
                body,
                body_id: element.id.clone(),
                wing,
                index: k,
                spanwise: s,
                semichord: 0.5 * chord,
                width,
                quarter_chord: root + s * span_axis,
                span_axis,
                chord_axis: Vector3::from(surface.chord_axis),
                normal_axis: Vector3::from(surface.normal_axis),
                table_id: surface.table.clone(),
                table: 0,
                control: surface.control.clone(),
            });
        }
    }
    Ok(out)
}

pub fn build_drag_strips(config: &AirframeConfig) -> Result<Vec<DragStrip>> {
    let mut out = Vec::new();
    for (body, element) in config.bodies.iter().enumerate() {
        let Some(d) = &element.fuselage_drag else {
            continue;
        };
        if !(d.length > 0.0) || d.stations == 0 {
            return Err(Error::ZeroSpan(element.id.clone()));
        }
        let width = d.length / d.stations as f64;
        let axis = Vector3::from(d.axis);
        for k in 0..d.stations {
            out.push(DragStrip {
                body,
                index: k,
                center: Vector3::from(d.start) + (k as f64 + 0.5) * width * axis,
                axis,
                radius: d.radius,
                width,
                cd0: d.cd0,
                cd_cross: d.cd_cross,
            });
        }
    }
    Ok(out)
}
