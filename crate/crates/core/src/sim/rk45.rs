//! Embedded Dormand–Prince 5(4) pair with the classic step-size controller.

use nalgebra::SVector;

use crate::error::{Error, Result};

pub const H_MIN: f64 = 1e-12;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus the embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<const N: usize> {
    pub z_next: SVector<f64, N>,
    /// Mixed absolute/relative RMS error norm; the step is acceptable when <= 1.
    pub error: f64,
    pub h_next: f64,
    /// Derivative at `(t + h, z_next)`, reusable as the next first stage.
    pub k_last: SVector<f64, N>,
}

impl<const N: usize> StepOutcome<N> {
    pub fn accepted(&self) -> bool {
        self.error <= 1.0
    }
}

/// Proposed next step from the error norm of a step of size `h`.
pub fn next_step_size(h: f64, error: f64) -> f64 {
    let factor = if error == 0.0 {
        5.0
    } else {
        (0.9 * error.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * factor
}

/// One Dormand–Prince step of size `h` from `(t, z)`.
///
/// `k1` is the derivative at `(t, z)` if already known (first-same-as-last).
pub fn rk45_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    z: &SVector<f64, N>,
    h: f64,
    k1: Option<SVector<f64, N>>,
    tol: &Tolerances,
) -> Result<StepOutcome<N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidOptions(format!("step size must be positive, got {h}")));
    }
    let k1 = match k1 {
        Some(k) => k,
        None => f(t, z)?,
    };
    let k2 = f(t + C2 * h, &(z + h * (A21 * k1)))?;
    let k3 = f(t + C3 * h, &(z + h * (A31 * k1 + A32 * k2)))?;
    let k4 = f(t + C4 * h, &(z + h * (A41 * k1 + A42 * k2 + A43 * k3)))?;
    let k5 = f(
        t + C5 * h,
        &(z + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)),
    )?;
    let k6 = f(
        t + h,
        &(z + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)),
    )?;
    let z_next = z + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = f(t + h, &z_next)?;
    let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

    let mut sum = 0.0;
    for i in 0..N {
        let scale = tol.abs_tol + tol.rel_tol * z[i].abs().max(z_next[i].abs());
        let r = err_vec[i] / scale;
        sum += r * r;
    }
    let error = (sum / N as f64).sqrt();
    let error = if error.is_nan() { f64::INFINITY } else { error };
    Ok(StepOutcome {
        z_next,
        error,
        h_next: next_step_size(h, error),
        k_last: k7,
    })
}

/// Adaptive integration from `t0` to `t_end`, returning accepted steps.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    z0: SVector<f64, N>,
    t_end: f64,
    tol: &Tolerances,
    h_init: f64,
    max_step: f64,
) -> Result<(Vec<f64>, Vec<SVector<f64, N>>)>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let mut t = t0;
    let mut z = z0;
    let mut h = h_init.min(max_step);
    let mut k1 = None;
    let mut ts = vec![t];
    let mut zs = vec![z];
    while t < t_end {
        let h_try = h.min(t_end - t);
        let out = rk45_step(&mut f, t, &z, h_try, k1, tol)?;
        if out.accepted() {
            t = if h_try == t_end - t { t_end } else { t + h_try };
            z = out.z_next;
            if !z.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { t });
            }
            k1 = Some(out.k_last);
            ts.push(t);
            zs.push(z);
        }
        h = out.h_next.min(max_step);
        if h < H_MIN {
            return Err(Error::StepUnderflow { t, h });
        }
    }
    Ok((ts, zs))
}
