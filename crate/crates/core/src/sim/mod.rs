//! Adaptive integration of the aircraft equations of motion with Euler-pole
//! switching and per-station flow probes.

mod rk45;

pub use rk45::{integrate, next_step_size, rk45_step, StepOutcome, Tolerances, H_MIN};

use serde::{Deserialize, Serialize};

use crate::aero::station_flows_body;
use crate::aircraft::{state_derivative, Aircraft};
use crate::airframe::{convention_switch, AircraftState, Convention, StateVector, WingPoses};
use crate::controls::{ControlVector, MorphRates};
use crate::error::{Error, Result};

/// Anything that prescribes controls and wing motion over time.
pub trait ControlSource: Sync {
    fn controls_at(&self, t: f64) -> (ControlVector, MorphRates);

    /// Time span over which the source is defined; `None` means all time.
    fn span(&self) -> Option<(f64, f64)> {
        None
    }
}

impl ControlSource for ControlVector {
    fn controls_at(&self, _t: f64) -> (ControlVector, MorphRates) {
        (self.clone(), MorphRates::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub h_init: f64,
    /// Switch Euler conventions once the active pole angle exceeds this.
    pub pole_threshold: f64,
    /// Station labels (`body_id:index`) to record.
    pub probes: Vec<String>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 0.02,
            h_init: 1e-3,
            pole_threshold: 1.047,
            probes: Vec::new(),
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidOptions("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0 && self.h_init > 0.0) {
            return Err(Error::InvalidOptions("step sizes must be positive".into()));
        }
        if !(self.pole_threshold > 0.0 && self.pole_threshold < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidOptions("pole threshold must lie in (0, pi/2)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    PoleSwitch { from: Convention, to: Convention },
    Warning(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub t: f64,
    pub kind: EventKind,
}

/// Effective angle and airspeed history of one station.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub label: String,
    pub station: usize,
    pub semichord: f64,
    pub phi: Vec<f64>,
    pub airspeed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<AircraftState>,
    pub controls: Vec<ControlVector>,
    pub probes: Vec<ProbeSeries>,
    pub events: Vec<SimEvent>,
}

pub const TRAJECTORY_HEADER: &str =
    "t,x,y,z,pitch,yaw,roll,u,v,w,p_rate,q_rate,r_rate,convention";

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &AircraftState {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn pole_switches(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::PoleSwitch { .. }))
            .count()
    }

    pub fn probe(&self, label: &str) -> Option<&ProbeSeries> {
        self.probes.iter().find(|p| p.label == label)
    }

    /// States with `p_rate, q_rate, r_rate` as body-axis angular rates.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(TRAJECTORY_HEADER);
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let w = s.angular_velocity_body();
            out.push_str(&format!(
                "{t},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.pos.x,
                s.pos.y,
                s.pos.z,
                s.euler.pitch,
                s.euler.yaw,
                s.euler.roll,
                s.vel.x,
                s.vel.y,
                s.vel.z,
                w.x,
                w.y,
                w.z,
                s.euler.convention.tag()
            ));
        }
        out
    }

    pub fn probe_csv_string(&self, probe: &ProbeSeries) -> String {
        let mut out = String::from("t,phi_eff,airspeed\n");
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t},{},{}\n", probe.phi[i], probe.airspeed[i]));
        }
        out
    }
}

fn record_probes(
    aircraft: &Aircraft,
    state: &AircraftState,
    controls: &ControlVector,
    rates: &MorphRates,
    probes: &mut [ProbeSeries],
) {
    if probes.is_empty() {
        return;
    }
    let wings = WingPoses::from_controls(controls, rates);
    let flows = station_flows_body(aircraft, state, &wings);
    for p in probes {
        p.phi.push(flows[p.station].phi_eff);
        p.airspeed.push(flows[p.station].airspeed);
    }
}

/// Integrate the equations of motion from `z0` over `t_span`.
///
/// The pole criterion is checked only after accepted steps; a switch
/// re-expresses the state in the other convention and restarts the stage
/// cache so no step straddles two conventions.
pub fn simulate(
    aircraft: &Aircraft,
    schedule: &dyn ControlSource,
    z0: &AircraftState,
    t_span: (f64, f64),
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    options.validate()?;
    let (t0, t_end) = t_span;
    if !(t_end > t0) {
        return Err(Error::InvalidOptions("empty time span".into()));
    }
    if let Some((a, b)) = schedule.span() {
        if t0 < a - 1e-12 {
            return Err(Error::ScheduleCoverage(t0));
        }
        if t_end > b + 1e-9 {
            return Err(Error::ScheduleCoverage(t_end));
        }
    }
    if !z0.is_finite() {
        return Err(Error::NonFinite { t: t0 });
    }
    let mut probes = Vec::with_capacity(options.probes.len());
    for label in &options.probes {
        let station = aircraft
            .station_index(label)
            .ok_or_else(|| Error::InvalidOptions(format!("unknown probe station `{label}`")))?;
        probes.push(ProbeSeries {
            label: label.clone(),
            station,
            semichord: aircraft.stations[station].semichord,
            phi: Vec::new(),
            airspeed: Vec::new(),
        });
    }

    let tol = options.tolerances();
    let mut events = Vec::new();
    let mut state = *z0;
    if state.euler.near_pole(options.pole_threshold) {
        let from = state.convention();
        state = convention_switch(&state)?;
        events.push(SimEvent {
            t: t0,
            kind: EventKind::PoleSwitch {
                from,
                to: state.convention(),
            },
        });
    }

    let mut t = t0;
    let (c0, r0) = schedule.controls_at(t0);
    record_probes(aircraft, &state, &c0, &r0, &mut probes);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![state],
        controls: vec![c0],
        probes: Vec::new(),
        events: Vec::new(),
    };

    let mut h = options.h_init.min(options.max_step);
    let mut k1: Option<StateVector> = None;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > options.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        let conv = state.convention();
        let mut f = |tt: f64, z: &StateVector| -> Result<StateVector> {
            let s = AircraftState::from_vector(z, conv);
            let (c, r) = schedule.controls_at(tt);
            state_derivative(aircraft, &s, &c, &r)
        };
        let remaining = t_end - t;
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        let out = rk45_step(&mut f, t, &state.to_vector(), h_try, k1, &tol)?;
        if out.accepted() {
            t = if last { t_end } else { t + h_try };
            if !out.z_next.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { t });
            }
            state = AircraftState::from_vector(&out.z_next, conv);
            k1 = Some(out.k_last);
            if state.euler.near_pole(options.pole_threshold) {
                state = convention_switch(&state)?;
                k1 = None;
                events.push(SimEvent {
                    t,
                    kind: EventKind::PoleSwitch {
                        from: conv,
                        to: state.convention(),
                    },
                });
            }
            let (c, r) = schedule.controls_at(t);
            record_probes(aircraft, &state, &c, &r, &mut probes);
            traj.times.push(t);
            traj.states.push(state);
            traj.controls.push(c);
        }
        h = out.h_next.min(options.max_step);
        if h < H_MIN {
            return Err(Error::StepUnderflow { t, h });
        }
    }
    traj.probes = probes;
    traj.events = events;
    Ok(traj)
}

/// Run independent simulations, in parallel when enabled.
pub fn simulate_batch(
    aircraft: &Aircraft,
    runs: &[(&dyn ControlSource, AircraftState, (f64, f64))],
    options: &IntegratorOptions,
    exec: crate::exec::Execution,
) -> Vec<Result<Trajectory>> {
    crate::exec::map(exec, runs, |(src, z0, span)| {
        simulate(aircraft, *src, z0, *span, options)
    })
}
