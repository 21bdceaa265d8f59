//! Strip-theory loads and their generalized (Lagrangian) counterparts.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign};

use nalgebra::{Matrix3, Vector3, Vector6};

use super::coefficients::{eval_unchecked, Coefficients};
use super::stations::AeroStation;
use crate::aircraft::Aircraft;
use crate::airframe::{
    element_frames, rate_map_unchecked, rotation_from_euler, AircraftState, AirframeConfig, Side,
    SurfaceControl, WingPoses,
};
use crate::controls::ControlVector;
use crate::error::{Error, Result};

/// Local flow at one station.
///
/// The direction vectors are in whichever frame the sample was built in;
/// [`station_flow`] returns earth-frame samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub phi_eff: f64,
    pub airspeed: f64,
    pub lift_dir: Vector3<f64>,
    pub drag_dir: Vector3<f64>,
    pub moment_dir: Vector3<f64>,
}

impl FlowSample {
    /// Decompose the velocity of a section through still air.
    ///
    /// `chord` points to the leading edge, `normal` to the suction side and
    /// `span` along the span; the spanwise velocity component is discarded.
    pub fn from_velocity(
        velocity: &Vector3<f64>,
        chord: &Vector3<f64>,
        normal: &Vector3<f64>,
        span: &Vector3<f64>,
    ) -> Self {
        let moment_dir = chord.cross(normal);
        let in_plane = velocity - velocity.dot(span) * span;
        let airspeed = in_plane.norm();
        if airspeed == 0.0 {
            return Self {
                phi_eff: 0.0,
                airspeed: 0.0,
                lift_dir: *normal,
                drag_dir: -chord,
                moment_dir,
            };
        }
        let mut phi = (-in_plane.dot(normal)).atan2(in_plane.dot(chord));
        if phi <= -PI {
            phi = PI;
        }
        let drag_dir = -in_plane / airspeed;
        Self {
            phi_eff: phi,
            airspeed,
            lift_dir: drag_dir.cross(&moment_dir),
            drag_dir,
            moment_dir,
        }
    }

    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self {
            lift_dir: r * self.lift_dir,
            drag_dir: r * self.drag_dir,
            moment_dir: r * self.moment_dir,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StationLoads {
    pub lift: Vector3<f64>,
    pub drag: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl StationLoads {
    pub fn force(&self) -> Vector3<f64> {
        self.lift + self.drag
    }
}

/// Section loads of one strip of width `width`.
pub fn station_loads(
    flow: &FlowSample,
    coeffs: &Coefficients,
    density: f64,
    semichord: f64,
    width: f64,
) -> StationLoads {
    let k = density * flow.airspeed * flow.airspeed * semichord * width;
    StationLoads {
        lift: k * coeffs.cl * flow.lift_dir,
        drag: k * coeffs.cd * flow.drag_dir,
        moment: k * semichord * coeffs.cm * flow.moment_dir,
    }
}

/// Force on `x_S` (earth frame) and the generalized moment conjugate to the
/// Euler angles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralizedLoads {
    pub q_x: Vector3<f64>,
    pub q_theta: Vector3<f64>,
}

impl GeneralizedLoads {
    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.q_x);
        v.fixed_rows_mut::<3>(3).copy_from(&self.q_theta);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite())
    }
}

impl Add for GeneralizedLoads {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            q_x: self.q_x + o.q_x,
            q_theta: self.q_theta + o.q_theta,
        }
    }
}

impl AddAssign for GeneralizedLoads {
    fn add_assign(&mut self, o: Self) {
        self.q_x += o.q_x;
        self.q_theta += o.q_theta;
    }
}

/// Resultant force and moment about S, body frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyWrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl BodyWrench {
    pub fn add_force_at(&mut self, force: Vector3<f64>, point: &Vector3<f64>) {
        self.force += force;
        self.moment += point.cross(&force);
    }

    pub fn generalize(&self, state: &AircraftState) -> GeneralizedLoads {
        GeneralizedLoads {
            q_x: rotation_from_euler(&state.euler) * self.force,
            q_theta: rate_map_unchecked(&state.euler).transpose() * self.moment,
        }
    }
}

/// Body-frame motion shared by every station at one instant.
struct Pose {
    v_b: Vector3<f64>,
    omega: Vector3<f64>,
    wing_rotation: [Matrix3<f64>; 2],
    wing_rate: [Vector3<f64>; 2],
    wing_root: [Vector3<f64>; 2],
}

fn slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl Pose {
    fn new(config: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> Self {
        let r = rotation_from_euler(&state.euler);
        let wing = |side: Side| wings.get(side);
        Self {
            v_b: r.transpose() * state.vel,
            omega: rate_map_unchecked(&state.euler) * state.euler_rates,
            wing_rotation: [wing(Side::Left).rotation(), wing(Side::Right).rotation()],
            wing_rate: [wing(Side::Left).relative_rate(), wing(Side::Right).relative_rate()],
            wing_root: [config.wing_root_for(Side::Left), config.wing_root_for(Side::Right)],
        }
    }
}

/// Body-frame position, velocity and axes of a station.
struct StationFrame {
    point: Vector3<f64>,
    velocity: Vector3<f64>,
    chord: Vector3<f64>,
    normal: Vector3<f64>,
    span: Vector3<f64>,
}

fn station_frame(st: &AeroStation, pose: &Pose) -> StationFrame {
    match st.wing {
        Some(side) => {
            let i = slot(side);
            let rot = &pose.wing_rotation[i];
            let lever = rot * st.quarter_chord;
            let point = pose.wing_root[i] + lever;
            StationFrame {
                point,
                velocity: pose.v_b + pose.omega.cross(&point) + pose.wing_rate[i].cross(&lever),
                chord: rot * st.chord_axis,
                normal: rot * st.normal_axis,
                span: rot * st.span_axis,
            }
        }
        None => StationFrame {
            point: st.quarter_chord,
            velocity: pose.v_b + pose.omega.cross(&st.quarter_chord),
            chord: st.chord_axis,
            normal: st.normal_axis,
            span: st.span_axis,
        },
    }
}

fn body_flow(frame: &StationFrame) -> FlowSample {
    FlowSample::from_velocity(&frame.velocity, &frame.chord, &frame.normal, &frame.span)
}

/// Deflection seen by a station's bound control surface, if any.
pub fn station_deflection(st: &AeroStation, controls: &ControlVector) -> (f64, f64) {
    match &st.control {
        None => (0.0, 0.0),
        Some(b) => {
            let d = match b.control {
                SurfaceControl::Elevator => controls.elevator,
                SurfaceControl::Rudder => controls.rudder,
                SurfaceControl::Aileron => controls.aileron,
            };
            (b.sign * d, b.effectiveness)
        }
    }
}

/// Earth-frame flow sample at one station.
pub fn station_flow(
    aircraft: &Aircraft,
    station: usize,
    state: &AircraftState,
    wings: &WingPoses,
) -> FlowSample {
    let pose = Pose::new(&aircraft.config, state, wings);
    let frame = station_frame(&aircraft.stations[station], &pose);
    body_flow(&frame).rotated(&rotation_from_euler(&state.euler))
}

/// Body-frame flow samples at every station, in station order.
pub fn station_flows_body(
    aircraft: &Aircraft,
    state: &AircraftState,
    wings: &WingPoses,
) -> Vec<FlowSample> {
    let pose = Pose::new(&aircraft.config, state, wings);
    aircraft
        .stations
        .iter()
        .map(|st| body_flow(&station_frame(st, &pose)))
        .collect()
}

/// Body-frame loads of every station together with its application point.
pub fn station_loads_body(
    aircraft: &Aircraft,
    state: &AircraftState,
    controls: &ControlVector,
    wings: &WingPoses,
) -> Vec<(Vector3<f64>, StationLoads)> {
    let pose = Pose::new(&aircraft.config, state, wings);
    let rho = aircraft.config.air_density;
    aircraft
        .stations
        .iter()
        .map(|st| {
            let frame = station_frame(st, &pose);
            let flow = body_flow(&frame);
            let (delta, eff) = station_deflection(st, controls);
            let c = eval_unchecked(&aircraft.models[st.table], flow.phi_eff, delta, eff)
                .scaled(aircraft.coefficient_scale);
            (frame.point, station_loads(&flow, &c, rho, st.semichord, st.width))
        })
        .collect()
}

/// Lifting-surface loads about S in body axes, summed in station order.
pub fn surface_wrench(
    aircraft: &Aircraft,
    state: &AircraftState,
    controls: &ControlVector,
    wings: &WingPoses,
) -> BodyWrench {
    let mut w = BodyWrench::default();
    for (point, l) in station_loads_body(aircraft, state, controls, wings) {
        w.add_force_at(l.force(), &point);
        w.moment += l.moment;
    }
    w
}

pub fn aero_loads(
    aircraft: &Aircraft,
    state: &AircraftState,
    controls: &ControlVector,
    wings: &WingPoses,
) -> GeneralizedLoads {
    surface_wrench(aircraft, state, controls, wings).generalize(state)
}

/// Fuselage drag about S in body axes.
pub fn fuselage_wrench(aircraft: &Aircraft, state: &AircraftState) -> BodyWrench {
    let r = rotation_from_euler(&state.euler);
    let v_b = r.transpose() * state.vel;
    let omega = rate_map_unchecked(&state.euler) * state.euler_rates;
    let rho = aircraft.config.air_density;
    let mut w = BodyWrench::default();
    for strip in &aircraft.strips {
        let u = v_b + omega.cross(&strip.center);
        let speed = u.norm();
        if speed == 0.0 {
            continue;
        }
        let cos_phi = u.dot(&strip.axis) / speed;
        let sin2 = (1.0 - cos_phi * cos_phi).max(0.0);
        let cd = (strip.cd0 + (strip.cd_cross - strip.cd0) * sin2) * aircraft.coefficient_scale;
        let drag = -rho * speed * strip.radius * strip.width * cd * u;
        w.add_force_at(drag, &strip.center);
    }
    w
}

pub fn fuselage_drag(aircraft: &Aircraft, state: &AircraftState) -> GeneralizedLoads {
    fuselage_wrench(aircraft, state).generalize(state)
}

/// Weight of every element acting at its current center of mass.
pub fn gravity_loads(config: &AirframeConfig, state: &AircraftState, wings: &WingPoses) -> GeneralizedLoads {
    let r = rotation_from_euler(&state.euler);
    let g_b = r.transpose() * Vector3::new(0.0, 0.0, config.gravity);
    let mut w = BodyWrench::default();
    for e in element_frames(config, wings) {
        w.add_force_at(e.mass * g_b, &e.com);
    }
    w.generalize(state)
}

/// Thrust along the configured thrust line.
pub fn propulsion_loads(thrust: f64, config: &AirframeConfig, state: &AircraftState) -> Result<GeneralizedLoads> {
    if thrust < 0.0 {
        return Err(Error::NegativeThrust(thrust));
    }
    let mut w = BodyWrench::default();
    w.add_force_at(
        thrust * Vector3::from(config.thrust.direction),
        &Vector3::from(config.thrust.point),
    );
    Ok(w.generalize(state))
}

/// The generalized external load vector `f` of the equations of motion.
pub fn total_external_loads(
    aircraft: &Aircraft,
    state: &AircraftState,
    controls: &ControlVector,
    wings: &WingPoses,
) -> Result<Vector6<f64>> {
    let mut w = surface_wrench(aircraft, state, controls, wings);
    let fus = fuselage_wrench(aircraft, state);
    w.force += fus.force;
    w.moment += fus.moment;
    let total = w.generalize(state)
        + gravity_loads(&aircraft.config, state, wings)
        + propulsion_loads(controls.thrust, &aircraft.config, state)?;
    if !total.is_finite() {
        return Err(Error::NonFinite { t: f64::NAN });
    }
    Ok(total.to_vector())
}
