//! Static and dynamic stability of trim points: state Jacobians, eigenmodes
//! with classical labels, acceleration gradients and yaw-perturbation
//! deviation metrics.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, DVector, SMatrix, SVector};
use serde::Serialize;

use crate::airframe::{to_convention, AircraftState, Convention, StateVector};
use crate::controls::ControlVector;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::sim::{simulate, IntegratorOptions};
use crate::trim::{trim_residual, TrimPoint, TrimSpaceGrid, RESIDUAL_TOL};
use crate::{state_derivative, Aircraft};

pub type StateMatrix = SMatrix<f64, 12, 12>;

/// Finite-difference steps per state component.
const RATE_STEP: f64 = 1e-6;
const ANGLE_STEP: f64 = 1e-7;
/// Fraction of (scaled) eigenvector energy needed to call a mode
/// longitudinal or lateral.
pub const DOMINANCE: f64 = 0.6;
const ZERO_EIG: f64 = 1e-5;

/// Longitudinal state indices: u, w, pitch rate, x, z, pitch.
pub const LONGITUDINAL: [usize; 6] = [0, 2, 3, 6, 8, 9];
/// Lateral state indices: v, yaw rate, roll rate, y, yaw, roll.
pub const LATERAL: [usize; 6] = [1, 4, 5, 7, 10, 11];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModeLabel {
    Phugoid,
    ShortPeriod,
    DutchRoll,
    Roll,
    Spiral,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub eigenvalue: Complex<f64>,
    pub natural_frequency: f64,
    pub damping_ratio: f64,
    /// Unit eigenvector in state coordinates.
    pub eigenvector: Vec<Complex<f64>>,
    pub label: ModeLabel,
}

impl Mode {
    pub fn is_oscillatory(&self) -> bool {
        self.eigenvalue.im.abs() > ZERO_EIG
    }

    /// Oscillation period, infinite for real modes.
    pub fn period(&self) -> f64 {
        if self.is_oscillatory() {
            2.0 * PI / self.eigenvalue.im.abs()
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalSet {
    pub modes: Vec<Mode>,
}

impl ModalSet {
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    pub fn find(&self, label: ModeLabel) -> Option<&Mode> {
        self.modes.iter().find(|m| m.label == label)
    }

    /// Largest real part among modes that are not pure translation or
    /// heading drift (zero eigenvalues).
    pub fn max_real(&self) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.eigenvalue.norm() > ZERO_EIG)
            .map(|m| m.eigenvalue.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.max_real() < 0.0
    }

    /// Whether the spectrum equals its own conjugate, element for element.
    pub fn is_conjugate_symmetric(&self) -> bool {
        let eigs = self.eigenvalues();
        eigs.iter().all(|e| eigs.iter().any(|f| f.re == e.re && f.im == -e.im))
    }

    pub fn dutch_roll_damping(&self) -> Option<f64> {
        self.find(ModeLabel::DutchRoll).map(|m| m.damping_ratio)
    }

    /// The least-damped oscillatory mode.
    pub fn dominant_oscillation(&self) -> Option<&Mode> {
        self.modes
            .iter()
            .filter(|m| m.is_oscillatory())
            .max_by(|a, b| a.eigenvalue.re.total_cmp(&b.eigenvalue.re))
    }
}

fn check_trimmed(aircraft: &Aircraft, point: &TrimPoint) -> Result<()> {
    let residual = trim_residual(aircraft, &point.target, &point.controls)?.amax();
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::OffTrim { residual });
    }
    Ok(())
}

fn step_for(k: usize) -> f64 {
    if k >= 9 {
        ANGLE_STEP
    } else {
        RATE_STEP
    }
}

fn derivative(aircraft: &Aircraft, z: &StateVector, conv: Convention, controls: &ControlVector) -> Result<StateVector> {
    state_derivative(aircraft, &AircraftState::from_vector(z, conv), controls, &Default::default())
}

/// Central-difference Jacobian of the state derivative about `z0` with the
/// given step scale (1 for the standard steps).
pub fn jacobian_at(aircraft: &Aircraft, z0: &AircraftState, controls: &ControlVector, step_scale: f64) -> Result<StateMatrix> {
    let z = z0.to_vector();
    let conv = z0.convention();
    let mut j = StateMatrix::zeros();
    for k in 0..12 {
        let h = step_for(k) * step_scale;
        let mut zp = z;
        let mut zm = z;
        zp[k] += h;
        zm[k] -= h;
        let fp = derivative(aircraft, &zp, conv, controls)?;
        let fm = derivative(aircraft, &zm, conv, controls)?;
        j.set_column(k, &((fp - fm) / (2.0 * h)));
    }
    Ok(j)
}

/// State Jacobian at a converged trim point.
pub fn linearize(aircraft: &Aircraft, point: &TrimPoint) -> Result<StateMatrix> {
    check_trimmed(aircraft, point)?;
    jacobian_at(aircraft, &point.target.state(), &point.controls, 1.0)
}

/// Eigenvector by inverse iteration on `(J - lambda I)`.
fn eigenvector(j: &StateMatrix, lambda: Complex<f64>) -> Vec<Complex<f64>> {
    let n = 12;
    let shift = lambda + Complex::new(1e-10 * (1.0 + lambda.norm()), 0.0);
    let a = DMatrix::from_fn(n, n, |r, c| {
        Complex::new(j[(r, c)], 0.0) - if r == c { shift } else { Complex::new(0.0, 0.0) }
    });
    let lu = a.lu();
    let mut x = DVector::from_fn(n, |i, _| Complex::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    for _ in 0..3 {
        match lu.solve(&x) {
            Some(y) => {
                let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if !(norm > 0.0) || !norm.is_finite() {
                    break;
                }
                x = y / Complex::new(norm, 0.0);
            }
            None => break,
        }
    }
    // fix the phase so the largest component is real and positive
    let (imax, _) = x.iter().enumerate().fold((0, 0.0), |acc, (i, c)| {
        if c.norm() > acc.1 {
            (i, c.norm())
        } else {
            acc
        }
    });
    let phase = x[imax] / Complex::new(x[imax].norm().max(1e-300), 0.0);
    x.iter().map(|c| c / phase).collect()
}

/// Fraction of scaled eigenvector energy in the given state indices.
/// Velocities are scaled by `1/airspeed`; positions are ignored.
fn energy_fraction(v: &[Complex<f64>], idx: &[usize], airspeed: f64) -> f64 {
    let w = |i: usize| {
        let s = if i < 3 { 1.0 / airspeed } else { 1.0 };
        if (6..9).contains(&i) {
            0.0
        } else {
            (v[i] * s).norm_sqr()
        }
    };
    let total: f64 = (0..12).map(w).sum();
    if total == 0.0 {
        return 0.0;
    }
    idx.iter().map(|&i| w(i)).sum::<f64>() / total
}

/// Eigen-decomposition of a state Jacobian with classical mode labels.
///
/// `airspeed` scales the velocity components when judging whether a mode
/// is longitudinal or lateral.
pub fn modal_analysis(j: &StateMatrix, airspeed: f64) -> ModalSet {
    let eigs = j.complex_eigenvalues();
    let scale = if airspeed > 0.0 { airspeed } else { 1.0 };
    let mut modes: Vec<Mode> = eigs
        .iter()
        .map(|&lambda| {
            let wn = lambda.norm();
            let zeta = if wn > 0.0 { -lambda.re / wn } else { 0.0 };
            Mode {
                eigenvalue: lambda,
                natural_frequency: wn,
                damping_ratio: zeta,
                eigenvector: eigenvector(j, lambda),
                label: ModeLabel::Unclassified,
            }
        })
        .collect();

    #[derive(PartialEq)]
    enum Plane {
        Long,
        Lat,
        Mixed,
    }
    let plane = |m: &Mode| {
        if m.natural_frequency < ZERO_EIG || !m.eigenvector.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Plane::Mixed;
        }
        let lat = energy_fraction(&m.eigenvector, &LATERAL, scale);
        if lat >= DOMINANCE {
            Plane::Lat
        } else if 1.0 - lat >= DOMINANCE {
            Plane::Long
        } else {
            Plane::Mixed
        }
    };
    let planes: Vec<Plane> = modes.iter().map(plane).collect();

    let pick = |filter: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..modes.len()).filter(|&i| filter(i)).collect() };
    let long_osc = pick(&|i| planes[i] == Plane::Long && modes[i].is_oscillatory());
    let lat_osc = pick(&|i| planes[i] == Plane::Lat && modes[i].is_oscillatory());
    let lat_real = pick(&|i| planes[i] == Plane::Lat && !modes[i].is_oscillatory());

    let freq = |i: &usize| modes[*i].eigenvalue.im.abs();
    let mut labels = vec![ModeLabel::Unclassified; modes.len()];
    if !long_osc.is_empty() {
        let fmax = long_osc.iter().map(freq).fold(0.0, f64::max);
        let fmin = long_osc.iter().map(freq).fold(f64::INFINITY, f64::min);
        for &i in &long_osc {
            labels[i] = if fmax > fmin * 1.5 {
                if freq(&i) >= fmax * (1.0 - 1e-9) {
                    ModeLabel::ShortPeriod
                } else if freq(&i) <= fmin * (1.0 + 1e-9) {
                    ModeLabel::Phugoid
                } else {
                    ModeLabel::Unclassified
                }
            } else if freq(&i) > 1.0 {
                ModeLabel::ShortPeriod
            } else {
                ModeLabel::Phugoid
            };
        }
    }
    for &i in &lat_osc {
        labels[i] = ModeLabel::DutchRoll;
    }
    if !lat_real.is_empty() {
        let mag = |i: usize| modes[i].eigenvalue.re.abs();
        let fastest = *lat_real.iter().max_by(|&&a, &&b| mag(a).total_cmp(&mag(b))).unwrap();
        let slowest = *lat_real.iter().min_by(|&&a, &&b| mag(a).total_cmp(&mag(b))).unwrap();
        let roll_share = |i: usize| {
            let v = &modes[i].eigenvector;
            let lat: f64 = [1, 4, 5, 10, 11]
                .iter()
                .map(|&k| (v[k] * if k < 3 { 1.0 / scale } else { 1.0 }).norm_sqr())
                .sum();
            (v[5].norm_sqr() + v[11].norm_sqr()) / lat.max(1e-300)
        };
        if lat_real.len() >= 2 && roll_share(fastest) >= DOMINANCE {
            labels[fastest] = ModeLabel::Roll;
        }
        if labels[slowest] == ModeLabel::Unclassified && (lat_real.len() >= 2 || mag(slowest) < 1.0) {
            labels[slowest] = ModeLabel::Spiral;
        }
    }
    for (m, l) in modes.iter_mut().zip(labels) {
        m.label = l;
    }
    ModalSet { modes }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticGradients {
    /// Change in pitch acceleration per unit angle-of-attack offset.
    pub alpha: f64,
    /// Change in yaw acceleration per unit sideslip offset.
    pub beta: f64,
}

impl StaticGradients {
    pub fn is_stable(&self) -> bool {
        self.alpha < 0.0 && self.beta < 0.0
    }
}

/// Pitch and yaw acceleration gradients with respect to attitude offsets
/// at fixed flight velocity; negative means statically stable.
pub fn static_gradients(aircraft: &Aircraft, point: &TrimPoint) -> Result<StaticGradients> {
    check_trimmed(aircraft, point)?;
    let z0 = point.target.state();
    let z = z0.to_vector();
    let diff = |angle: usize, row: usize| -> Result<f64> {
        let mut zp = z;
        let mut zm = z;
        zp[angle] += ANGLE_STEP;
        zm[angle] -= ANGLE_STEP;
        let fp = derivative(aircraft, &zp, z0.convention(), &point.controls)?;
        let fm = derivative(aircraft, &zm, z0.convention(), &point.controls)?;
        Ok((fp[row] - fm[row]) / (2.0 * ANGLE_STEP))
    };
    Ok(StaticGradients {
        alpha: diff(9, 3)?,
        beta: diff(10, 4)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationMetrics {
    pub delta_psi: f64,
    pub delta_phi: f64,
    pub t_end: f64,
    pub perturbation: f64,
}

pub const DEFAULT_YAW_PERTURBATION: f64 = 0.05;
pub const DEFAULT_DEVIATION_TIME: f64 = 15.0;

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Deviation metrics from the `[pitch, yaw, roll]` attitude at the end of a
/// run, relative to the trim attitude.
pub fn deviation_from(trim: &AircraftState, end: &AircraftState, perturbation: f64, t_end: f64) -> Result<DeviationMetrics> {
    let e = to_convention(end, Convention::Zyx321)?.euler;
    Ok(DeviationMetrics {
        delta_psi: wrap(e.yaw - trim.euler.yaw).abs() / perturbation,
        delta_phi: wrap(e.roll - trim.euler.roll).abs() / perturbation,
        t_end,
        perturbation,
    })
}

/// Open-loop response to a yaw offset with the controls frozen at trim.
pub fn perturbation_metrics(
    aircraft: &Aircraft,
    point: &TrimPoint,
    perturbation: f64,
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<DeviationMetrics> {
    check_trimmed(aircraft, point)?;
    let trim = point.target.state();
    let mut z0 = trim;
    z0.euler.yaw += perturbation;
    let traj = simulate(aircraft, &point.controls, &z0, (0.0, t_end), options)?;
    deviation_from(&trim, traj.last(), perturbation, t_end)
}

/// `exp(J t) dz0`.
pub fn propagate_linear(j: &StateMatrix, dz0: &SVector<f64, 12>, t: f64) -> SVector<f64, 12> {
    (j * t).exp() * dz0
}

/// Worst deviation between nonlinear and linearized responses to `dz0`,
/// relative to the largest linear response, over `[0, duration]` sampled at
/// `samples` points. Velocities are scaled by the airspeed and positions
/// are excluded.
pub fn linearization_error(
    aircraft: &Aircraft,
    point: &TrimPoint,
    j: &StateMatrix,
    dz0: &SVector<f64, 12>,
    duration: f64,
    samples: usize,
    options: &IntegratorOptions,
) -> Result<f64> {
    let trim = point.target.state();
    let z_tr = trim.to_vector();
    let u = point.target.airspeed;
    let weight = |v: &SVector<f64, 12>| -> f64 {
        (0..12)
            .filter(|i| !(6..9).contains(i))
            .map(|i| {
                let s = if i < 3 { v[i] / u } else { v[i] };
                s * s
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut state = AircraftState::from_vector(&(z_tr + dz0), trim.convention());
    let mut t = 0.0;
    let mut worst_err: f64 = 0.0;
    let mut peak: f64 = weight(dz0);
    for k in 1..=samples {
        let tk = duration * k as f64 / samples as f64;
        let traj = simulate(aircraft, &point.controls, &state, (t, tk), options)?;
        state = to_convention(traj.last(), trim.convention())?;
        t = tk;
        let mut dz = state.to_vector() - z_tr;
        dz[6] -= u * tk;
        let lin = propagate_linear(j, dz0, tk);
        peak = peak.max(weight(&lin));
        worst_err = worst_err.max(weight(&(dz - lin)));
    }
    Ok(worst_err / peak)
}

/// One row of a stability map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityRecord {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub policy: &'static str,
    pub max_real_eig: f64,
    pub dutch_roll_damping: Option<f64>,
    pub delta_psi: f64,
    pub delta_phi: f64,
    pub static_alpha: f64,
    pub static_beta: f64,
}

pub const STABILITY_HEADER: &str =
    "alpha,beta,Gamma,policy,max_real_eig,dutch_roll_damping,delta_psi,delta_phi,static_alpha,static_beta";

pub fn analyze_point(aircraft: &Aircraft, point: &TrimPoint, options: &IntegratorOptions) -> Result<StabilityRecord> {
    let j = linearize(aircraft, point)?;
    let modes = modal_analysis(&j, point.target.airspeed);
    let grad = static_gradients(aircraft, point)?;
    let dev = perturbation_metrics(aircraft, point, DEFAULT_YAW_PERTURBATION, DEFAULT_DEVIATION_TIME, options)?;
    Ok(StabilityRecord {
        alpha: point.target.alpha,
        beta: point.target.beta,
        gamma: point.target.dihedral_constraint,
        policy: point.target.policy.name(),
        max_real_eig: modes.max_real(),
        dutch_roll_damping: modes.dutch_roll_damping(),
        delta_psi: dev.delta_psi,
        delta_phi: dev.delta_phi,
        static_alpha: grad.alpha,
        static_beta: grad.beta,
    })
}

/// Stability of every trimmed node of a grid, in parallel when enabled.
/// Nodes whose analysis fails are skipped.
pub fn stability_map(aircraft: &Aircraft, grid: &TrimSpaceGrid, options: &IntegratorOptions, exec: Execution) -> Vec<StabilityRecord> {
    let points: Vec<&TrimPoint> = grid
        .cells
        .iter()
        .filter(|c| c.is_trimmed())
        .filter_map(|c| c.point())
        .collect();
    exec::map(exec, &points, |p| analyze_point(aircraft, p, options).ok())
        .into_iter()
        .flatten()
        .collect()
}

pub fn stability_csv(records: &[StabilityRecord]) -> String {
    let mut out = String::from(STABILITY_HEADER);
    out.push('\n');
    for r in records {
        let dr = r.dutch_roll_damping.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.alpha, r.beta, r.gamma, r.policy, r.max_real_eig, dr, r.delta_psi, r.delta_phi, r.static_alpha, r.static_beta
        );
    }
    out
}
