//! Open-loop nose-pointing maneuvers: target orientation paths, control
//! schedules built by trim continuation along them, and tracking metrics.

mod maneuver;
mod schedule;
mod tracking;

pub use maneuver::{ManeuverSpec, SimulationSettings};
pub use schedule::{build_schedule, ControlSchedule, ScheduleSpec, KNOT_HEADER};
pub use tracking::{evaluate_tracking, observed_angles, AxisError, TrackingReport};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Commanded fuselage orientation and airspeed at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTarget {
    pub alpha: f64,
    pub beta: f64,
    pub roll: f64,
    pub airspeed: f64,
}

/// Closed loop in (alpha, beta) around a center, faded in over the first
/// half period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrollPath {
    pub period: f64,
    #[serde(default)]
    pub alpha_amplitude: f64,
    #[serde(default)]
    pub beta_amplitude: f64,
    #[serde(default)]
    pub alpha_center: f64,
    #[serde(default)]
    pub beta_center: f64,
    #[serde(default = "default_airspeed")]
    pub airspeed: f64,
    #[serde(default)]
    pub roll: f64,
}

fn default_airspeed() -> f64 {
    25.0
}

impl ScrollPath {
    pub fn new(period: f64, alpha_amplitude: f64, beta_amplitude: f64) -> Self {
        Self {
            period,
            alpha_amplitude,
            beta_amplitude,
            alpha_center: 0.0,
            beta_center: 0.0,
            airspeed: default_airspeed(),
            roll: 0.0,
        }
    }

    /// Ramp factor: raised cosine over the first half period, then 1.
    pub fn ramp(phase: f64) -> f64 {
        if phase <= 0.5 {
            0.5 * (1.0 - (2.0 * PI * phase).cos())
        } else {
            1.0
        }
    }

    pub fn at_phase(&self, phase: f64) -> PathTarget {
        let r = Self::ramp(phase);
        let (s, c) = (2.0 * PI * phase).sin_cos();
        PathTarget {
            alpha: r * (self.alpha_amplitude * c + self.alpha_center),
            beta: r * (self.beta_amplitude * s + self.beta_center),
            roll: r * self.roll,
            airspeed: self.airspeed,
        }
    }
}

pub fn scroll_target(path: &ScrollPath, t: f64) -> PathTarget {
    path.at_phase(t / path.period)
}

/// Rectangle in (alpha, beta) traversed at constant rate, reached by a
/// straight leg from (0, 0) to (upper, 0).
///
/// The loop starts at (upper, 0) and runs left to the `left` bound, down to
/// `lower`, right to `right`, up to `upper` and back to the start. `period`
/// is the time for one loop; the leading leg moves at the same rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectPath {
    pub period: f64,
    pub left: f64,
    pub right: f64,
    pub upper: f64,
    pub lower: f64,
    #[serde(default = "default_airspeed")]
    pub airspeed: f64,
}

impl RectPath {
    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.right - self.left) + (self.upper - self.lower))
    }

    /// Leading leg duration as a fraction of the period.
    pub fn lead_in(&self) -> f64 {
        self.upper.abs() / self.perimeter()
    }

    /// (alpha, beta) vertices visited after the leading leg, closing the loop.
    fn vertices(&self) -> [(f64, f64); 6] {
        [
            (self.upper, 0.0),
            (self.upper, self.left),
            (self.lower, self.left),
            (self.lower, self.right),
            (self.upper, self.right),
            (self.upper, 0.0),
        ]
    }

    /// Phases at which the path changes direction.
    pub fn corner_phases(&self) -> Vec<f64> {
        let p = self.perimeter();
        let lead = self.lead_in();
        let mut out = vec![lead];
        let mut s = 0.0;
        let v = self.vertices();
        for w in v.windows(2).take(4) {
            s += (w[1].0 - w[0].0).abs() + (w[1].1 - w[0].1).abs();
            out.push(lead + s / p);
        }
        out
    }

    pub fn at_phase(&self, phase: f64) -> PathTarget {
        let p = self.perimeter();
        let lead = self.lead_in();
        let (alpha, beta) = if phase <= lead {
            let f = if lead > 0.0 { phase.max(0.0) / lead } else { 1.0 };
            (f * self.upper, 0.0)
        } else {
            let mut d = ((phase - lead) * p) % p;
            let v = self.vertices();
            let mut at = v[0];
            for w in v.windows(2) {
                let len = (w[1].0 - w[0].0).abs() + (w[1].1 - w[0].1).abs();
                if d <= len && len > 0.0 {
                    let f = d / len;
                    at = (w[0].0 + f * (w[1].0 - w[0].0), w[0].1 + f * (w[1].1 - w[0].1));
                    break;
                }
                d -= len;
                at = w[1];
            }
            at
        };
        PathTarget {
            alpha,
            beta,
            roll: 0.0,
            airspeed: self.airspeed,
        }
    }
}

pub fn rect_target(path: &RectPath, t: f64) -> PathTarget {
    path.at_phase(t / path.period)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetPath {
    Scroll(ScrollPath),
    Rect(RectPath),
}

impl TargetPath {
    pub fn period(&self) -> f64 {
        match self {
            TargetPath::Scroll(p) => p.period,
            TargetPath::Rect(p) => p.period,
        }
    }

    pub fn with_period(&self, period: f64) -> Self {
        let mut out = *self;
        match &mut out {
            TargetPath::Scroll(p) => p.period = period,
            TargetPath::Rect(p) => p.period = period,
        }
        out
    }

    pub fn at_phase(&self, phase: f64) -> PathTarget {
        match self {
            TargetPath::Scroll(p) => p.at_phase(phase),
            TargetPath::Rect(p) => p.at_phase(phase),
        }
    }

    pub fn target(&self, t: f64) -> PathTarget {
        self.at_phase(t / self.period())
    }

    /// Phase at which a run of `loops` full loops ends.
    pub fn end_phase(&self, loops: f64) -> f64 {
        match self {
            TargetPath::Scroll(_) => loops,
            TargetPath::Rect(p) => p.lead_in() + loops,
        }
    }

    /// Phases that must be schedule knots (path corners).
    pub fn corner_phases(&self, end: f64) -> Vec<f64> {
        match self {
            TargetPath::Scroll(_) => Vec::new(),
            TargetPath::Rect(p) => {
                let base = p.corner_phases();
                let lead = p.lead_in();
                let mut out = vec![lead];
                let mut k = 0.0;
                while lead + k <= end {
                    out.extend(base[1..].iter().map(|c| c + k).filter(|&c| c <= end));
                    k += 1.0;
                }
                out
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period() > 0.0 && self.period().is_finite()) {
            return Err(Error::InvalidOptions("path period must be positive".into()));
        }
        match self {
            TargetPath::Scroll(p) => {
                if !(p.airspeed > 0.0) {
                    return Err(Error::NonPositiveAirspeed);
                }
            }
            TargetPath::Rect(p) => {
                if !(p.left < p.right && p.lower < p.upper) {
                    return Err(Error::InvalidOptions(
                        "rectangle bounds need left < right and lower < upper".into(),
                    ));
                }
                if p.left > 0.0 || p.right < 0.0 {
                    return Err(Error::InvalidOptions(
                        "rectangle must straddle zero sideslip".into(),
                    ));
                }
                if !(p.airspeed > 0.0) {
                    return Err(Error::NonPositiveAirspeed);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn path_a() -> ScrollPath {
        ScrollPath {
            alpha_center: 0.2,
            beta_center: 0.2,
            ..ScrollPath::new(10.0, 0.2, 0.2)
        }
    }

    #[test]
    fn scroll_starts_at_origin() {
        let t = scroll_target(&path_a(), 0.0);
        assert_eq!((t.alpha, t.beta), (0.0, 0.0));
    }

    #[test]
    fn scroll_half_period_value() {
        let t = scroll_target(&path_a(), 5.0);
        // r = 1, cos(pi) = -1, sin(pi) = 0
        assert_abs_diff_eq!(t.alpha, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.beta, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn scroll_is_smooth_at_ramp_end() {
        let p = path_a();
        let eps = 1e-6;
        let a = scroll_target(&p, 5.0 - eps);
        let b = scroll_target(&p, 5.0 + eps);
        assert!((a.alpha - b.alpha).abs() < 1e-6);
        assert!((a.beta - b.beta).abs() < 1e-6);
        // one-sided slopes agree to first order
        let h = 1e-5;
        let left = (scroll_target(&p, 5.0).beta - scroll_target(&p, 5.0 - h).beta) / h;
        let right = (scroll_target(&p, 5.0 + h).beta - scroll_target(&p, 5.0).beta) / h;
        assert!((left - right).abs() < 1e-3, "{left} vs {right}");
        assert!(ScrollPath::ramp(0.5 - 1e-7) > 1.0 - 1e-12);
    }

    fn rect() -> RectPath {
        RectPath {
            period: 40.0,
            left: -0.2,
            right: 0.2,
            upper: 0.3,
            lower: 0.1,
            airspeed: 25.0,
        }
    }

    #[test]
    fn rect_lead_in_and_closure() {
        let p = rect();
        let path = TargetPath::Rect(p);
        let t0 = path.target(0.0);
        assert_eq!((t0.alpha, t0.beta), (0.0, 0.0));
        let lead = p.lead_in() * p.period;
        let t1 = path.target(lead);
        assert_abs_diff_eq!(t1.alpha, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(t1.beta, 0.0, epsilon = 1e-12);
        let t2 = path.target(lead + p.period);
        assert_abs_diff_eq!(t2.alpha, t1.alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(t2.beta, t1.beta, epsilon = 1e-12);
        // first leg goes left along the upper bound
        let t3 = path.target(lead + 0.05 * p.period);
        assert_abs_diff_eq!(t3.alpha, 0.3, epsilon = 1e-12);
        assert!(t3.beta < 0.0);
    }

    #[test]
    fn rect_corners_are_kinks() {
        let p = rect();
        let path = TargetPath::Rect(p);
        let corner = p.corner_phases()[1] * p.period;
        let h = 1e-4;
        let at = path.target(corner);
        assert_abs_diff_eq!(at.alpha, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(at.beta, -0.2, epsilon = 1e-9);
        let before = path.target(corner - h);
        let after = path.target(corner + h);
        let d_before = ((at.alpha - before.alpha) / h, (at.beta - before.beta) / h);
        let d_after = ((after.alpha - at.alpha) / h, (after.beta - at.beta) / h);
        assert!(d_before.0.abs() < 1e-9 && d_before.1 < 0.0);
        assert!(d_after.1.abs() < 1e-9 && d_after.0 < 0.0);
    }

    #[test]
    fn rect_validation() {
        let mut p = rect();
        p.left = 0.3;
        assert!(TargetPath::Rect(p).validate().is_err());
        assert!(TargetPath::Scroll(ScrollPath::new(0.0, 0.1, 0.1)).validate().is_err());
    }
}
