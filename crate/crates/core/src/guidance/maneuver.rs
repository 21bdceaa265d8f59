use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScheduleSpec, TargetPath};
use crate::error::{Error, Result};
use crate::sim::IntegratorOptions;
use crate::spectral::DEFAULT_KAPPA_THRESHOLD;
use crate::trim::{ConstraintPolicy, MorphChannel};
use crate::Aircraft;

/// Integrator and probe settings for flying a maneuver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Station labels to record; empty means every surface tip.
    pub probes: Vec<String>,
    pub kappa_threshold: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            abs_tol: 1e-9,
            max_step: 0.02,
            probes: Vec::new(),
            kappa_threshold: DEFAULT_KAPPA_THRESHOLD,
        }
    }
}

impl SimulationSettings {
    pub fn integrator_options(&self, aircraft: &Aircraft) -> IntegratorOptions {
        let probes = if self.probes.is_empty() {
            aircraft
                .tip_stations()
                .into_iter()
                .map(|i| aircraft.stations[i].label())
                .collect()
        } else {
            self.probes.clone()
        };
        IntegratorOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            probes,
            ..Default::default()
        }
    }
}

fn default_loops() -> f64 {
    2.5
}

fn default_knots() -> usize {
    200
}

fn default_policy() -> ConstraintPolicy {
    ConstraintPolicy::InboardFrozen
}

fn default_channel() -> MorphChannel {
    MorphChannel::Dihedral
}

/// A maneuver file: the target path, trim constraints, optional period
/// sweep and simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverSpec {
    pub name: String,
    pub path: TargetPath,
    #[serde(default)]
    pub dihedral_constraint: f64,
    #[serde(default = "default_policy")]
    pub policy: ConstraintPolicy,
    #[serde(default = "default_channel")]
    pub channel: MorphChannel,
    #[serde(default = "default_loops")]
    pub loops: f64,
    #[serde(default = "default_knots")]
    pub knots_per_period: usize,
    /// Periods to fly; the path's own period when empty.
    #[serde(default)]
    pub periods: Vec<f64>,
    #[serde(default)]
    pub simulation: SimulationSettings,
}

impl ManeuverSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.schedule_spec().validate()?;
        if spec.periods.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidOptions("periods must be positive".into()));
        }
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn schedule_spec(&self) -> ScheduleSpec {
        ScheduleSpec {
            path: self.path,
            loops: self.loops,
            knots_per_period: self.knots_per_period,
            dihedral_constraint: self.dihedral_constraint,
            policy: self.policy,
            channel: self.channel,
        }
    }

    pub fn period_list(&self) -> Vec<f64> {
        if self.periods.is_empty() {
            vec![self.path.period()]
        } else {
            self.periods.clone()
        }
    }
}
