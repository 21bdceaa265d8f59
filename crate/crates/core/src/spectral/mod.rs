//! Angle-of-attack spectra at aerodynamic stations and reduced-frequency
//! checks of the quasisteady assumption.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::sim::{ProbeSeries, Trajectory};

pub const MIN_SAMPLES: usize = 16;
pub const DEFAULT_SAMPLE_RATE: f64 = 50.0;
pub const DEFAULT_KAPPA_THRESHOLD: f64 = 0.01;
/// Above-threshold to target power ratio at which a run is flagged.
pub const FLAG_POWER_RATIO: f64 = 0.01;
/// Probes whose maneuver-frequency amplitude is below this fraction of the
/// strongest probe's barely take part in the maneuver and are not judged.
pub const MIN_RELATIVE_RESPONSE: f64 = 0.01;
/// Maneuver-frequency amplitude (rad) below which a probe is taken as still.
pub const MIN_RESPONSE_AMPLITUDE: f64 = 1e-9;

pub const SPECTRUM_HEADER: &str = "omega_rad_s,amplitude_rad,kappa_min,kappa_max";

/// Linear interpolation of `(times, values)` onto a uniform grid of spacing
/// `dt` starting at the first sample and ending at or before the last.
pub fn resample_uniform(times: &[f64], values: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    if times.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let t0 = times[0];
    let n = ((times[times.len() - 1] - t0) / dt + 1e-9).floor() as usize + 1;
    let mut out_t = Vec::with_capacity(n);
    let mut out_v = Vec::with_capacity(n);
    let mut k = 0;
    for i in 0..n {
        let t = t0 + i as f64 * dt;
        while k + 2 < times.len() && times[k + 1] < t {
            k += 1;
        }
        let v = if times.len() == 1 {
            values[0]
        } else {
            let (ta, tb) = (times[k], times[k + 1]);
            let s = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
            values[k] + s * (values[k + 1] - values[k])
        };
        out_t.push(t);
        out_v.push(v);
    }
    (out_t, out_v)
}

/// Samples of `(times, values)` with `lo <= t <= hi`.
pub fn window(times: &[f64], values: &[f64], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
        .map(|(t, v)| (*t, *v))
        .unzip()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub omega: Vec<f64>,
    pub amplitude: Vec<f64>,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
        .collect()
}

/// Single-sided amplitude spectrum of a uniformly sampled series, mean
/// removed and Hann windowed. A sinusoid of amplitude A on a bin reports A.
pub fn amplitude_spectrum(series: &[f64], dt: f64) -> Result<AmplitudeSpectrum> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(Error::SeriesTooShort { len: n });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidOptions("sample spacing must be positive".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let w = hann(n);
    let gain: f64 = w.iter().sum();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex::new((x - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let omega = (0..=half).map(|k| 2.0 * PI * k as f64 / (n as f64 * dt)).collect();
    let amplitude = (0..=half)
        .map(|k| {
            let single = if k == 0 || (n % 2 == 0 && k == half) { 1.0 } else { 2.0 };
            single * buf[k].norm() / gain
        })
        .collect();
    Ok(AmplitudeSpectrum { omega, amplitude })
}

pub fn reduced_frequency(semichord: f64, omega: f64, airspeed: f64) -> f64 {
    semichord * omega / airspeed
}

/// Spectrum of one station with the reduced-frequency band implied by the
/// extremes of its airspeed history.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpectrum {
    pub label: String,
    pub semichord: f64,
    pub omega: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub kappa_min: Vec<f64>,
    pub kappa_max: Vec<f64>,
    pub min_airspeed: f64,
    pub max_airspeed: f64,
}

impl ProbeSpectrum {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(SPECTRUM_HEADER);
        out.push('\n');
        for k in 0..self.omega.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.omega[k], self.amplitude[k], self.kappa_min[k], self.kappa_max[k]
            );
        }
        out
    }
}

/// The exact reduced frequency lies between the bounds from the largest
/// and smallest airspeed seen.
pub fn kappa_band(
    spectrum: &AmplitudeSpectrum,
    label: &str,
    semichord: f64,
    airspeed: &[f64],
) -> Result<ProbeSpectrum> {
    if airspeed.is_empty() || airspeed.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::NonPositiveAirspeed);
    }
    let vmin = airspeed.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = airspeed.iter().copied().fold(0.0, f64::max);
    Ok(ProbeSpectrum {
        label: label.to_string(),
        semichord,
        kappa_min: spectrum.omega.iter().map(|w| reduced_frequency(semichord, *w, vmax)).collect(),
        kappa_max: spectrum.omega.iter().map(|w| reduced_frequency(semichord, *w, vmin)).collect(),
        omega: spectrum.omega.clone(),
        amplitude: spectrum.amplitude.clone(),
        min_airspeed: vmin,
        max_airspeed: vmax,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnsteadinessReport {
    pub label: String,
    pub threshold: f64,
    pub target_omega: f64,
    pub target_amplitude: f64,
    /// Largest amplitude at frequencies whose upper reduced-frequency bound
    /// exceeds the threshold, and where it occurs.
    pub peak_above_amplitude: f64,
    pub peak_above_omega: Option<f64>,
    pub power_ratio: f64,
    /// Period of the frequency at which the upper bound reaches the threshold.
    pub critical_timescale: f64,
}

impl UnsteadinessReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: target {:.4} rad/s amplitude {:.3e} rad ({:.4} deg); ",
            self.label,
            self.target_omega,
            self.target_amplitude,
            self.target_amplitude.to_degrees()
        );
        match self.peak_above_omega {
            Some(w) => {
                let _ = write!(
                    s,
                    "above kappa={} peak {:.3e} rad ({:.4} deg) at {:.3} rad/s, power ratio {:.3e}",
                    self.threshold,
                    self.peak_above_amplitude,
                    self.peak_above_amplitude.to_degrees(),
                    w,
                    self.power_ratio
                );
            }
            None => {
                let _ = write!(s, "no content above kappa={}", self.threshold);
            }
        }
        let _ = write!(s, "; t* = {:.3} s", self.critical_timescale);
        s
    }
}

/// Verdict over all probes of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAssessment {
    /// Largest power ratio among probes that respond to the maneuver.
    pub worst_ratio: f64,
    pub worst_probe: Option<String>,
    /// Probes left out for responding too weakly.
    pub inactive: Vec<String>,
}

impl RunAssessment {
    pub fn flagged(&self) -> bool {
        self.worst_ratio >= FLAG_POWER_RATIO
    }

    pub fn summary(&self) -> String {
        let mut s = match &self.worst_probe {
            Some(p) => format!("worst above-threshold power ratio {:.3e} at {p}", self.worst_ratio),
            None => "no responding probes".to_string(),
        };
        if !self.inactive.is_empty() {
            let _ = write!(s, " (not judged: {})", self.inactive.join(", "));
        }
        if self.flagged() {
            s.push_str("\n** UNSTEADY: content above the reduced-frequency threshold; quasisteady aerodynamics is not valid for this run **");
        }
        s
    }
}

pub fn assess_run(reports: &[UnsteadinessReport]) -> RunAssessment {
    let strongest = reports.iter().map(|r| r.target_amplitude).fold(0.0, f64::max);
    let mut out = RunAssessment {
        worst_ratio: 0.0,
        worst_probe: None,
        inactive: Vec::new(),
    };
    for r in reports {
        if r.target_amplitude < MIN_RELATIVE_RESPONSE * strongest || r.target_amplitude < MIN_RESPONSE_AMPLITUDE {
            out.inactive.push(r.label.clone());
        } else if out.worst_probe.is_none() || r.power_ratio > out.worst_ratio {
            out.worst_ratio = r.power_ratio;
            out.worst_probe = Some(r.label.clone());
        }
    }
    out
}

/// Compare content above the reduced-frequency threshold (upper bound) with
/// the peak at the maneuver frequency `2 pi / period`.
pub fn unsteadiness_report(spectrum: &ProbeSpectrum, threshold: f64, period: f64) -> Result<UnsteadinessReport> {
    let n = spectrum.omega.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { len: n });
    }
    let target = 2.0 * PI / period;
    let dw = spectrum.omega[1] - spectrum.omega[0];
    if !(target >= 0.5 * dw && target <= spectrum.omega[n - 1]) {
        return Err(Error::TargetOutOfRange { omega: target });
    }
    let k_target = ((target - spectrum.omega[0]) / dw).round() as usize;
    let target_amplitude = spectrum.amplitude[k_target];
    let mut peak = 0.0;
    let mut peak_omega = None;
    for k in 0..n {
        if spectrum.kappa_max[k] > threshold && spectrum.amplitude[k] > peak {
            peak = spectrum.amplitude[k];
            peak_omega = Some(spectrum.omega[k]);
        }
    }
    let power_ratio = if peak == 0.0 {
        0.0
    } else if target_amplitude > 0.0 {
        (peak / target_amplitude).powi(2)
    } else {
        f64::INFINITY
    };
    let omega_star = threshold * spectrum.min_airspeed / spectrum.semichord;
    Ok(UnsteadinessReport {
        label: spectrum.label.clone(),
        threshold,
        target_omega: target,
        target_amplitude,
        peak_above_amplitude: peak,
        peak_above_omega: peak_omega,
        power_ratio,
        critical_timescale: 2.0 * PI / omega_star,
    })
}

/// Spectrum of one recorded probe over `[t_lo, t_hi]`.
pub fn probe_spectrum(
    traj: &Trajectory,
    probe: &ProbeSeries,
    span: (f64, f64),
    sample_rate: f64,
) -> Result<ProbeSpectrum> {
    let (t, phi) = window(&traj.times, &probe.phi, span.0, span.1);
    let (_, v) = window(&traj.times, &probe.airspeed, span.0, span.1);
    let (_, phi_u) = resample_uniform(&t, &phi, 1.0 / sample_rate);
    let spec = amplitude_spectrum(&phi_u, 1.0 / sample_rate)?;
    kappa_band(&spec, &probe.label, probe.semichord, &v)
}

/// Spectra and reports for every recorded probe, probes in parallel.
pub fn analyze_probes(
    traj: &Trajectory,
    span: (f64, f64),
    period: f64,
    threshold: f64,
    exec: Execution,
) -> Result<Vec<(ProbeSpectrum, UnsteadinessReport)>> {
    exec::map(exec, &traj.probes, |p| {
        let s = probe_spectrum(traj, p, span, DEFAULT_SAMPLE_RATE)?;
        let r = unsteadiness_report(&s, threshold, period)?;
        Ok((s, r))
    })
    .into_iter()
    .collect()
}
