//! Trim: control configurations that hold a prescribed orientation and
//! airspeed in steady level flight, and natural continuation along paths of
//! such targets.

mod space;

pub use space::{
    sweep_trim_space, GridCell, SweepOptions, TrimSpaceGrid, TRIM_SPACE_HEADER,
};

use nalgebra::{DMatrix, DVector, Vector6};
use serde::{Deserialize, Serialize};

use crate::airframe::{AircraftState, Side};
use crate::controls::{ControlId, ControlVector};
use crate::error::{Error, Result};
use crate::{state_derivative, Aircraft};

/// Convergence threshold on the infinity norm of the residual.
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
pub const MAX_JACOBIAN_CONDITION: f64 = 1e12;
const FD_STEP: f64 = 1e-6;
const MAX_HALVINGS: usize = 8;
const POLISH_ITERATIONS: usize = 2;
const BOUND_EPS: f64 = 1e-12;

/// Largest target change between consecutive continuation solves.
pub const MAX_ANGLE_STEP: f64 = 0.01;
pub const MAX_AIRSPEED_STEP: f64 = 1.0;

/// Which wing keeps its morphing angle at the constraint value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintPolicy {
    /// The wing on the inside of the yawed state is held.
    InboardFrozen,
    OutboardFrozen,
    LeftFrozen,
    RightFrozen,
}

impl ConstraintPolicy {
    /// Frozen wing at sideslip `beta`. Nose-left (negative) sideslip puts the
    /// right wing inboard; zero sideslip is treated as right-frozen.
    pub fn frozen_side(self, beta: f64) -> Side {
        match self {
            ConstraintPolicy::LeftFrozen => Side::Left,
            ConstraintPolicy::RightFrozen => Side::Right,
            ConstraintPolicy::InboardFrozen if beta > 0.0 => Side::Left,
            ConstraintPolicy::OutboardFrozen if beta < 0.0 => Side::Left,
            _ => Side::Right,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            ConstraintPolicy::LeftFrozen => ConstraintPolicy::RightFrozen,
            ConstraintPolicy::RightFrozen => ConstraintPolicy::LeftFrozen,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintPolicy::InboardFrozen => "inboard",
            ConstraintPolicy::OutboardFrozen => "outboard",
            ConstraintPolicy::LeftFrozen => "left",
            ConstraintPolicy::RightFrozen => "right",
        }
    }
}

/// The morphing angle actuated on the free wing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphChannel {
    Dihedral,
    Sweep,
}

impl MorphChannel {
    pub fn control(self, side: Side) -> ControlId {
        match self {
            MorphChannel::Dihedral => ControlId::Dihedral(side),
            MorphChannel::Sweep => ControlId::Sweep(side),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MorphChannel::Dihedral => "dihedral",
            MorphChannel::Sweep => "sweep",
        }
    }
}

/// Size of the trim problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrimDof {
    /// Thrust, elevator and symmetric incidence against the axial, normal
    /// and pitch accelerations (symmetric flight only).
    Pitch,
    /// Thrust, elevator, rudder, both incidences and one proxy morphing
    /// angle against all six accelerations.
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrimTarget {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub roll: f64,
    pub airspeed: f64,
    /// Dihedral of the wing that is not actuated.
    #[serde(default)]
    pub dihedral_constraint: f64,
    pub policy: ConstraintPolicy,
    pub channel: MorphChannel,
    pub dof: TrimDof,
}

impl TrimTarget {
    pub fn pitch(alpha: f64, airspeed: f64) -> Self {
        Self {
            alpha,
            beta: 0.0,
            roll: 0.0,
            airspeed,
            dihedral_constraint: 0.0,
            policy: ConstraintPolicy::RightFrozen,
            channel: MorphChannel::Dihedral,
            dof: TrimDof::Pitch,
        }
    }

    pub fn general(
        alpha: f64,
        beta: f64,
        airspeed: f64,
        dihedral_constraint: f64,
        policy: ConstraintPolicy,
        channel: MorphChannel,
    ) -> Self {
        Self {
            alpha,
            beta,
            roll: 0.0,
            airspeed,
            dihedral_constraint,
            policy,
            channel,
            dof: TrimDof::General,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.airspeed > 0.0) || !self.airspeed.is_finite() {
            return Err(Error::NonPositiveAirspeed);
        }
        if self.dof == TrimDof::Pitch && (self.beta != 0.0 || self.roll != 0.0) {
            return Err(Error::InvalidOptions(
                "the pitch trim problem needs zero sideslip and roll".into(),
            ));
        }
        Ok(())
    }

    /// Level flight along earth x with the fuselage at (alpha, beta, roll).
    pub fn state(&self) -> AircraftState {
        AircraftState::trim_layout(self.airspeed, self.alpha, self.beta, self.roll)
    }

    pub fn frozen_side(&self) -> Side {
        self.policy.frozen_side(self.beta)
    }

    pub fn active_side(&self) -> Side {
        self.frozen_side().mirror()
    }

    /// The control carrying the proxy morphing angle.
    pub fn proxy_control(&self) -> ControlId {
        self.channel.control(self.active_side())
    }

    /// Mirror image: sideslip and roll negate, left/right policies swap.
    pub fn mirrored(&self) -> Self {
        Self {
            beta: -self.beta,
            roll: -self.roll,
            policy: self.policy.mirrored(),
            ..*self
        }
    }

    fn lerp(&self, other: &Self, s: f64) -> Self {
        let l = |a: f64, b: f64| a + s * (b - a);
        Self {
            alpha: l(self.alpha, other.alpha),
            beta: l(self.beta, other.beta),
            roll: l(self.roll, other.roll),
            airspeed: l(self.airspeed, other.airspeed),
            dihedral_constraint: l(self.dihedral_constraint, other.dihedral_constraint),
            ..*other
        }
    }
}

/// A solved (or boundary) trim configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimPoint {
    pub target: TrimTarget,
    pub controls: ControlVector,
    /// Acceleration residual `[xdd, ydd, zdd, pitch, yaw, roll]`.
    pub residual: [f64; 6],
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Free controls sitting on a limit.
    pub active_limits: Vec<ControlId>,
}

impl TrimPoint {
    pub fn active_limit_names(&self) -> Vec<String> {
        self.active_limits.iter().map(|c| c.name()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unknown {
    Single(ControlId),
    SymmetricIncidence,
}

impl Unknown {
    fn get(self, c: &ControlVector) -> f64 {
        match self {
            Unknown::Single(id) => c.get(id),
            Unknown::SymmetricIncidence => 0.5 * (c.left.incidence + c.right.incidence),
        }
    }

    fn set(self, c: &mut ControlVector, v: f64) {
        match self {
            Unknown::Single(id) => c.set(id, v),
            Unknown::SymmetricIncidence => {
                c.left.incidence = v;
                c.right.incidence = v;
            }
        }
    }

    fn ids(self) -> Vec<ControlId> {
        match self {
            Unknown::Single(id) => vec![id],
            Unknown::SymmetricIncidence => {
                vec![ControlId::Incidence(Side::Left), ControlId::Incidence(Side::Right)]
            }
        }
    }

    fn limits(self, aircraft: &Aircraft) -> [f64; 2] {
        self.ids()[0].limits(&aircraft.config.limits)
    }
}

fn unknowns(target: &TrimTarget) -> Vec<Unknown> {
    match target.dof {
        TrimDof::Pitch => vec![
            Unknown::Single(ControlId::Thrust),
            Unknown::Single(ControlId::Elevator),
            Unknown::SymmetricIncidence,
        ],
        TrimDof::General => vec![
            Unknown::Single(ControlId::Thrust),
            Unknown::Single(ControlId::Elevator),
            Unknown::Single(ControlId::Rudder),
            Unknown::Single(ControlId::Incidence(Side::Left)),
            Unknown::Single(ControlId::Incidence(Side::Right)),
            Unknown::Single(target.proxy_control()),
        ],
    }
}

fn residual_rows(target: &TrimTarget) -> &'static [usize] {
    match target.dof {
        TrimDof::Pitch => &[0, 2, 3],
        TrimDof::General => &[0, 1, 2, 3, 4, 5],
    }
}

/// Apply the target's wing constraints to `controls` and mark the free entries.
pub fn constrain(target: &TrimTarget, controls: &ControlVector) -> ControlVector {
    let mut c = controls.clone();
    let gamma = target.dihedral_constraint;
    match target.dof {
        TrimDof::Pitch => {
            c.left.dihedral = gamma;
            c.right.dihedral = gamma;
        }
        TrimDof::General => {
            let frozen = target.frozen_side();
            match target.channel {
                MorphChannel::Dihedral => c.wing_mut(frozen).dihedral = gamma,
                MorphChannel::Sweep => {
                    c.wing_mut(frozen).sweep = 0.0;
                    c.left.dihedral = gamma;
                    c.right.dihedral = gamma;
                }
            }
        }
    }
    c.free_mask = [false; 10];
    for u in unknowns(target) {
        for id in u.ids() {
            c.free_mask[id.index()] = true;
        }
    }
    c
}

/// Acceleration residual of the trim condition: the translational and
/// Euler-angle acceleration rows of the state derivative at the target state.
pub fn trim_residual(aircraft: &Aircraft, target: &TrimTarget, controls: &ControlVector) -> Result<Vector6<f64>> {
    let zd = state_derivative(aircraft, &target.state(), controls, &Default::default())?;
    Ok(zd.fixed_rows::<6>(0).into())
}

struct Problem<'a> {
    aircraft: &'a Aircraft,
    target: &'a TrimTarget,
    base: ControlVector,
    unknowns: Vec<Unknown>,
    rows: &'static [usize],
    bounds: Vec<[f64; 2]>,
}

impl Problem<'_> {
    fn controls(&self, x: &DVector<f64>) -> ControlVector {
        let mut c = self.base.clone();
        for (u, v) in self.unknowns.iter().zip(x.iter()) {
            u.set(&mut c, *v);
        }
        c
    }

    fn eval(&self, x: &DVector<f64>) -> Result<(Vector6<f64>, DVector<f64>)> {
        let full = trim_residual(self.aircraft, self.target, &self.controls(x))?;
        let f = DVector::from_iterator(self.rows.len(), self.rows.iter().map(|&r| full[r]));
        Ok((full, f))
    }

    fn clamp(&self, x: &mut DVector<f64>) {
        for (v, b) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(b[0], b[1]);
        }
    }

    fn jacobian(&self, x: &DVector<f64>, f: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut j = DMatrix::zeros(f.len(), n);
        for k in 0..n {
            let h = if x[k] + FD_STEP > self.bounds[k][1] { -FD_STEP } else { FD_STEP };
            let mut xp = x.clone();
            xp[k] += h;
            let (_, fp) = self.eval(&xp)?;
            j.set_column(k, &((fp - f) / h));
        }
        Ok(j)
    }

    fn active(&self, x: &DVector<f64>) -> Vec<ControlId> {
        let mut out = Vec::new();
        for (k, u) in self.unknowns.iter().enumerate() {
            let b = self.bounds[k];
            if x[k] <= b[0] + BOUND_EPS || x[k] >= b[1] - BOUND_EPS {
                out.extend(u.ids());
            }
        }
        out
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

fn condition(j: &DMatrix<f64>) -> f64 {
    let s = j.clone().singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// A trim point together with the reason the solve stopped short, if any.
struct Outcome {
    point: TrimPoint,
    failure: Option<Error>,
}

fn newton(aircraft: &Aircraft, target: &TrimTarget, guess: &ControlVector) -> Result<Outcome> {
    target.validate()?;
    let base = constrain(target, guess);
    let unknowns = unknowns(target);
    let bounds = unknowns.iter().map(|u| u.limits(aircraft)).collect();
    let p = Problem {
        aircraft,
        target,
        rows: residual_rows(target),
        unknowns,
        bounds,
        base,
    };
    let mut x = DVector::from_iterator(p.unknowns.len(), p.unknowns.iter().map(|u| u.get(&p.base)));
    p.clamp(&mut x);
    let (mut full, mut f) = p.eval(&x)?;
    let mut iterations = 0;
    let mut failure = None;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        if inf_norm(&f) < RESIDUAL_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let j = p.jacobian(&x, &f)?;
        let cond = condition(&j);
        if cond > MAX_JACOBIAN_CONDITION {
            failure = Some(Error::SingularJacobian { cond });
            break;
        }
        let dx = match j.lu().solve(&(-&f)) {
            Some(dx) => dx,
            None => {
                failure = Some(Error::SingularJacobian { cond: f64::INFINITY });
                break;
            }
        };
        let norm = f.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut xt = &x + lambda * &dx;
            p.clamp(&mut xt);
            let (ft_full, ft) = p.eval(&xt)?;
            if ft.norm() < norm {
                accepted = Some((xt, ft_full, ft));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, ft_full, ft)) => {
                x = xt;
                full = ft_full;
                f = ft;
            }
            None => break,
        }
    }

    if converged && iterations > 0 {
        for _ in 0..POLISH_ITERATIONS {
            let j = p.jacobian(&x, &f)?;
            let Some(dx) = j.lu().solve(&(-&f)) else { break };
            let mut xt = &x + dx;
            p.clamp(&mut xt);
            let (ft_full, ft) = p.eval(&xt)?;
            if ft.norm() < f.norm() {
                x = xt;
                full = ft_full;
                f = ft;
            } else {
                break;
            }
        }
    }

    let active_limits = p.active(&x);
    let residual_norm = full.amax();
    if !converged && failure.is_none() {
        failure = Some(Error::TrimNotConverged {
            iterations,
            residual: residual_norm,
            active: active_limits.iter().map(|c| c.name()).collect(),
        });
    }
    Ok(Outcome {
        point: TrimPoint {
            target: *target,
            controls: p.controls(&x),
            residual: full.into(),
            residual_norm,
            converged,
            iterations,
            active_limits,
        },
        failure,
    })
}

/// Damped Newton solve of the trim condition from `guess`.
///
/// Free controls are clamped to their limits. A solve that stalls with a
/// control on its limit is returned as a non-converged point carrying the
/// active limits; any other failure is an error.
pub fn solve_trim(aircraft: &Aircraft, target: &TrimTarget, guess: &ControlVector) -> Result<TrimPoint> {
    let out = newton(aircraft, target, guess)?;
    match out.failure {
        Some(e) if out.point.active_limits.is_empty() => Err(e),
        _ => Ok(out.point),
    }
}

/// Seed for `next` from a solution at a neighbouring target: when the
/// actuated wing changes side, the proxy angle moves with it.
pub fn seed_from(prev: &TrimPoint, next: &TrimTarget) -> ControlVector {
    let mut c = prev.controls.clone();
    if prev.target.dof == TrimDof::General && next.dof == TrimDof::General {
        let from = prev.target.proxy_control();
        let to = next.proxy_control();
        if from != to {
            c.set(to, prev.controls.get(from));
        }
    }
    c
}

fn substeps(a: &TrimTarget, b: &TrimTarget) -> usize {
    let n = [
        (b.alpha - a.alpha).abs() / MAX_ANGLE_STEP,
        (b.beta - a.beta).abs() / MAX_ANGLE_STEP,
        (b.roll - a.roll).abs() / MAX_ANGLE_STEP,
        (b.dihedral_constraint - a.dihedral_constraint).abs() / MAX_ANGLE_STEP,
        (b.airspeed - a.airspeed).abs() / MAX_AIRSPEED_STEP,
    ]
    .into_iter()
    .fold(1.0, f64::max);
    (n - 1e-9).ceil().max(1.0) as usize
}

/// Continue from a converged point to `next`, subdividing large steps.
/// Returns the point at `next`, or the first non-converged intermediate point.
pub fn continue_to(aircraft: &Aircraft, from: &TrimPoint, next: &TrimTarget) -> Result<TrimPoint> {
    let n = substeps(&from.target, next);
    let mut prev = from.clone();
    for i in 1..=n {
        let t = if i == n { *next } else { from.target.lerp(next, i as f64 / n as f64) };
        let out = newton(aircraft, &t, &seed_from(&prev, &t))?;
        if !out.point.converged {
            return Ok(out.point);
        }
        prev = out.point;
    }
    Ok(prev)
}

/// Trim at `target` without a prior solution: a direct solve from neutral
/// controls, falling back to a symmetric solve at the same angle of attack
/// continued out to the requested sideslip.
pub fn solve_from_rest(aircraft: &Aircraft, target: &TrimTarget) -> Result<TrimPoint> {
    if let Ok(p) = solve_trim(aircraft, target, &ControlVector::default()) {
        if p.converged {
            return Ok(p);
        }
    }
    let mut pitch = TrimTarget::pitch(target.alpha, target.airspeed);
    pitch.dihedral_constraint = target.dihedral_constraint;
    let sym = solve_trim(aircraft, &pitch, &ControlVector::default())?;
    let p = if target.dof == TrimDof::Pitch {
        sym
    } else {
        let mut level = *target;
        level.beta = 0.0;
        level.roll = 0.0;
        let p = solve_trim(aircraft, &level, &sym.controls)?;
        if level == *target || !p.converged { p } else { continue_to(aircraft, &p, target)? }
    };
    if p.converged {
        Ok(p)
    } else {
        Err(Error::TrimNotConverged {
            iterations: p.iterations,
            residual: p.residual_norm,
            active: p.active_limit_names(),
        })
    }
}

/// Natural continuation along `targets`, each solve seeded by the previous
/// solution. Stops after the first non-converged point, which is included
/// as the boundary.
pub fn continue_path(aircraft: &Aircraft, targets: &[TrimTarget], guess: &ControlVector) -> Result<Vec<TrimPoint>> {
    let Some(first) = targets.first() else {
        return Ok(Vec::new());
    };
    let out = newton(aircraft, first, guess).map_err(|e| Error::FirstPointFailure(Box::new(e)))?;
    if !out.point.converged {
        let e = out.failure.unwrap_or(Error::TrimNotConverged {
            iterations: out.point.iterations,
            residual: out.point.residual_norm,
            active: out.point.active_limit_names(),
        });
        return Err(Error::FirstPointFailure(Box::new(e)));
    }
    let mut points = vec![out.point];
    for t in &targets[1..] {
        let p = continue_to(aircraft, points.last().unwrap(), t)?;
        let done = !p.converged;
        points.push(p);
        if done {
            break;
        }
    }
    Ok(points)
}
