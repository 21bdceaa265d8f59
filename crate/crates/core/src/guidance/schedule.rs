use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{PathTarget, TargetPath};
use crate::airframe::AircraftState;
use crate::controls::{ControlVector, MorphRates, WingAngles};
use crate::error::{Error, Result};
use crate::sim::{simulate, ControlSource, IntegratorOptions, Trajectory};
use crate::trim::{continue_to, solve_from_rest, ConstraintPolicy, MorphChannel, TrimPoint, TrimTarget};
use crate::Aircraft;

pub const KNOT_HEADER: &str = "t,phase,alpha_tg,beta_tg,roll_tg,airspeed,thrust,elevator,rudder,aileron,sweep_L,inc_L,dih_L,sweep_R,inc_R,dih_R,residual";

/// What to build a schedule for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub path: TargetPath,
    /// Run length in loops of the path (after the lead-in for rectangles).
    pub loops: f64,
    pub knots_per_period: usize,
    pub dihedral_constraint: f64,
    pub policy: ConstraintPolicy,
    pub channel: MorphChannel,
}

impl ScheduleSpec {
    pub fn new(path: TargetPath, dihedral_constraint: f64, policy: ConstraintPolicy) -> Self {
        Self {
            path,
            loops: 2.5,
            knots_per_period: 200,
            dihedral_constraint,
            policy,
            channel: MorphChannel::Dihedral,
        }
    }

    pub fn duration(&self) -> f64 {
        self.path.end_phase(self.loops) * self.path.period()
    }

    /// Window over which tracking is scored: after the scroll fade-in or the
    /// rectangle lead-in, to the end of the run.
    pub fn tracking_span(&self) -> (f64, f64) {
        let settle = match self.path {
            TargetPath::Scroll(_) => 0.5,
            TargetPath::Rect(p) => p.lead_in(),
        };
        (settle * self.path.period(), self.duration())
    }

    /// Knot phases: a uniform grid plus any path corners. They depend on the
    /// path shape only, never on its period.
    pub fn knot_phases(&self) -> Vec<f64> {
        let end = self.path.end_phase(self.loops);
        let n = self.knots_per_period as f64;
        let count = (end * n - 1e-9).ceil() as usize;
        let mut phases: Vec<f64> = (0..count).map(|k| k as f64 / n).collect();
        phases.push(end);
        phases.extend(self.path.corner_phases(end));
        phases.sort_by(f64::total_cmp);
        phases.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        phases
    }

    fn trim_target(&self, t: &PathTarget) -> TrimTarget {
        let mut target = TrimTarget::general(
            t.alpha,
            t.beta,
            t.airspeed,
            self.dihedral_constraint,
            self.policy,
            self.channel,
        );
        target.roll = t.roll;
        target
    }

    pub fn validate(&self) -> Result<()> {
        self.path.validate()?;
        if !(self.loops > 0.0) {
            return Err(Error::InvalidOptions("run length must be positive".into()));
        }
        if self.knots_per_period < 2 {
            return Err(Error::InvalidOptions("need at least two knots per period".into()));
        }
        Ok(())
    }
}

/// Piecewise-linear control schedule through trim solutions at knots.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    pub spec: ScheduleSpec,
    pub phases: Vec<f64>,
    pub times: Vec<f64>,
    pub targets: Vec<PathTarget>,
    pub controls: Vec<ControlVector>,
    /// Trim residual norm of each knot.
    pub residuals: Vec<f64>,
}

/// Trim at every knot of `spec`, each solve continued from the previous
/// knot. The actuated wing at each knot follows the sign of the target
/// sideslip there.
pub fn build_schedule(aircraft: &Aircraft, spec: &ScheduleSpec) -> Result<ControlSchedule> {
    spec.validate()?;
    let period = spec.path.period();
    let phases = spec.knot_phases();
    let targets: Vec<PathTarget> = phases.iter().map(|&p| spec.path.at_phase(p)).collect();
    let mut points: Vec<TrimPoint> = Vec::with_capacity(phases.len());
    for (k, t) in targets.iter().enumerate() {
        let target = spec.trim_target(t);
        let p = match points.last() {
            None => solve_from_rest(aircraft, &target).map_err(|e| Error::FirstPointFailure(Box::new(e)))?,
            Some(prev) => continue_to(aircraft, prev, &target)?,
        };
        if !p.converged {
            return Err(Error::ContinuationFailure {
                knot: k,
                t: phases[k] * period,
                active: p.active_limit_names(),
            });
        }
        points.push(p);
    }
    Ok(ControlSchedule {
        spec: *spec,
        times: phases.iter().map(|p| p * period).collect(),
        phases,
        targets,
        residuals: points.iter().map(|p| p.residual_norm).collect(),
        controls: points.into_iter().map(|p| p.controls).collect(),
    })
}

impl ControlSchedule {
    pub fn period(&self) -> f64 {
        self.spec.path.period()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// The same knot controls on a path of a different period.
    pub fn rescaled(&self, period: f64) -> Self {
        let mut spec = self.spec;
        spec.path = spec.path.with_period(period);
        Self {
            spec,
            times: self.phases.iter().map(|p| p * period).collect(),
            ..self.clone()
        }
    }

    /// Trimmed state at the first knot.
    pub fn initial_state(&self) -> AircraftState {
        self.spec.trim_target(&self.targets[0]).state()
    }

    pub fn trim_target(&self, k: usize) -> TrimTarget {
        self.spec.trim_target(&self.targets[k])
    }

    pub fn target(&self, t: f64) -> PathTarget {
        self.spec.path.target(t)
    }

    pub fn peak_thrust(&self) -> f64 {
        self.controls.iter().map(|c| c.thrust).fold(0.0, f64::max)
    }

    /// Fly the schedule open loop from the first knot's trim state.
    pub fn fly(&self, aircraft: &Aircraft, options: &IntegratorOptions) -> Result<Trajectory> {
        simulate(aircraft, self, &self.initial_state(), (0.0, self.duration()), options)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(KNOT_HEADER);
        out.push('\n');
        for k in 0..self.times.len() {
            let t = &self.targets[k];
            let c = &self.controls[k];
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                self.times[k], self.phases[k], t.alpha, t.beta, t.roll, t.airspeed
            );
            for v in [c.thrust, c.elevator, c.rudder, c.aileron] {
                let _ = write!(out, ",{v}");
            }
            for w in [&c.left, &c.right] {
                for v in w.as_array() {
                    let _ = write!(out, ",{v}");
                }
            }
            let _ = writeln!(out, ",{}", self.residuals[k]);
        }
        out
    }
}

fn wing_rate(a: &WingAngles, b: &WingAngles, dt: f64) -> WingAngles {
    WingAngles::new(
        (b.sweep - a.sweep) / dt,
        (b.incidence - a.incidence) / dt,
        (b.dihedral - a.dihedral) / dt,
    )
}

impl ControlSource for ControlSchedule {
    /// Linear interpolation between knots; wing rates are the segment
    /// slopes and wing accelerations are zero.
    fn controls_at(&self, t: f64) -> (ControlVector, MorphRates) {
        let n = self.times.len();
        if n == 1 || t >= self.times[n - 1] {
            return (self.controls[n - 1].clone(), MorphRates::default());
        }
        if t < self.times[0] {
            return (self.controls[0].clone(), MorphRates::default());
        }
        let k = self.times.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let dt = t1 - t0;
        let s = ((t - t0) / dt).clamp(0.0, 1.0);
        let (a, b) = (&self.controls[k], &self.controls[k + 1]);
        let rates = MorphRates {
            left_rate: wing_rate(&a.left, &b.left, dt),
            right_rate: wing_rate(&a.right, &b.right, dt),
            ..Default::default()
        };
        (a.lerp(b, s), rates)
    }

    fn span(&self) -> Option<(f64, f64)> {
        Some((self.times[0], self.duration()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance::{RectPath, ScrollPath};

    fn flat_schedule() -> ControlSchedule {
        let mut a = ControlVector::default();
        a.thrust = 1.0;
        a.left.dihedral = 0.0;
        let mut b = a.clone();
        b.thrust = 3.0;
        b.left.dihedral = 0.2;
        let spec = ScheduleSpec::new(TargetPath::Scroll(ScrollPath::new(1.0, 0.0, 0.0)), 0.0, ConstraintPolicy::InboardFrozen);
        ControlSchedule {
            spec,
            phases: vec![0.0, 1.0],
            times: vec![0.0, 2.0],
            targets: vec![spec.path.at_phase(0.0); 2],
            controls: vec![a, b],
            residuals: vec![0.0; 2],
        }
    }

    #[test]
    fn interpolation_and_rates() {
        let s = flat_schedule();
        let (c, r) = s.controls_at(0.5);
        assert!((c.thrust - 1.5).abs() < 1e-15);
        assert!((c.left.dihedral - 0.05).abs() < 1e-15);
        assert!((r.left_rate.dihedral - 0.1).abs() < 1e-15);
        assert_eq!(r.right_rate, WingAngles::default());
        assert_eq!(s.span(), Some((0.0, 2.0)));
        let (end, r) = s.controls_at(2.0);
        assert_eq!(end.thrust, 3.0);
        assert_eq!(r, MorphRates::default());
    }

    #[test]
    fn knot_phases_do_not_depend_on_period() {
        let a = ScheduleSpec::new(TargetPath::Scroll(ScrollPath::new(10.0, 0.2, 0.0)), 0.0, ConstraintPolicy::InboardFrozen);
        let mut b = a;
        b.path = b.path.with_period(40.0);
        assert_eq!(a.knot_phases(), b.knot_phases());
        assert_eq!(a.knot_phases().len(), 501);
        assert_eq!(b.duration(), 100.0);
    }

    #[test]
    fn rect_knots_include_corners() {
        let rect = RectPath {
            period: 30.0,
            left: -0.13,
            right: 0.17,
            upper: 0.31,
            lower: 0.07,
            airspeed: 25.0,
        };
        let spec = ScheduleSpec {
            loops: 1.0,
            ..ScheduleSpec::new(TargetPath::Rect(rect), 0.0, ConstraintPolicy::InboardFrozen)
        };
        let phases = spec.knot_phases();
        for c in rect.corner_phases() {
            assert!(phases.iter().any(|p| (p - c).abs() < 1e-12), "corner {c} missing");
        }
        assert!(phases.windows(2).all(|w| w[1] > w[0]));
    }
}
