use serde::Serialize;

use super::PathTarget;
use crate::airframe::{rotation_from_euler, AircraftState, Convention, EulerAngles};
use crate::sim::Trajectory;
use crate::spectral::{resample_uniform, window};

/// Sample spacing used to compare a trajectory with its target.
const TRACKING_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AxisError {
    pub rms: f64,
    pub max: f64,
}

impl AxisError {
    fn from_errors(e: &[f64]) -> Self {
        if e.is_empty() {
            return Self::default();
        }
        Self {
            rms: (e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64).sqrt(),
            max: e.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingReport {
    pub alpha: AxisError,
    pub beta: AxisError,
    pub roll: AxisError,
    pub span: (f64, f64),
    pub samples: usize,
}

impl TrackingReport {
    /// Combined RMS over angle of attack and sideslip.
    pub fn orientation_rms(&self) -> f64 {
        (0.5 * (self.alpha.rms.powi(2) + self.beta.rms.powi(2))).sqrt()
    }
}

/// Angle of attack, sideslip and 3-2-1 roll of the fuselage relative to its
/// velocity. Sideslip is positive when the nose is right of the velocity,
/// matching the trim targets.
pub fn observed_angles(state: &AircraftState) -> (f64, f64, f64) {
    let r = rotation_from_euler(&state.euler);
    let v = r.transpose() * state.vel;
    let speed = v.norm();
    let alpha = v.z.atan2(v.x);
    let beta = if speed > 0.0 { -(v.y / speed).clamp(-1.0, 1.0).asin() } else { 0.0 };
    let roll = EulerAngles::from_rotation(&r, Convention::Zyx321).roll;
    (alpha, beta, roll)
}

/// Pointwise orientation errors against `target`, resampled uniformly over
/// `span` (the whole trajectory when `None`).
pub fn evaluate_tracking(
    traj: &Trajectory,
    target: &dyn Fn(f64) -> PathTarget,
    span: Option<(f64, f64)>,
) -> TrackingReport {
    let (lo, hi) = span.unwrap_or((traj.times[0], *traj.times.last().unwrap()));
    let mut series = [Vec::new(), Vec::new(), Vec::new()];
    for s in &traj.states {
        let (a, b, r) = observed_angles(s);
        series[0].push(a);
        series[1].push(b);
        series[2].push(r);
    }
    let mut errors = [Vec::new(), Vec::new(), Vec::new()];
    let mut times = Vec::new();
    for (axis, values) in series.iter().enumerate() {
        let (t, v) = window(&traj.times, values, lo, hi);
        let (ut, uv) = resample_uniform(&t, &v, TRACKING_DT);
        errors[axis] = ut
            .iter()
            .zip(&uv)
            .map(|(t, v)| {
                let goal = target(*t);
                v - [goal.alpha, goal.beta, goal.roll][axis]
            })
            .collect();
        times = ut;
    }
    TrackingReport {
        alpha: AxisError::from_errors(&errors[0]),
        beta: AxisError::from_errors(&errors[1]),
        roll: AxisError::from_errors(&errors[2]),
        span: (lo, hi),
        samples: times.len(),
    }
}
