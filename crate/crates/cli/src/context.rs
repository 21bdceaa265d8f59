use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use morphwing::airframe::CASE_STUDY_TOML;
use morphwing::exec::Execution;
use morphwing::trim::{ConstraintPolicy, MorphChannel};
use morphwing::Aircraft;

use crate::manifest::OutputBatch;

/// Options shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Airframe configuration (TOML); the built-in case-study aircraft if omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out/<subcommand>].
    #[arg(long, env = "MORPHWING_OUT")]
    pub out: Option<PathBuf>,
    /// Run batch work on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

pub struct Context {
    pub aircraft: Aircraft,
    pub exec: Execution,
    pub batch: OutputBatch,
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

impl Context {
    /// Load the aircraft and open an (unwritten) output batch.
    pub fn open(common: &CommonArgs, subcommand: &str) -> Result<Self, String> {
        let dir = common
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(subcommand));
        let mut batch = OutputBatch::new(subcommand, dir);
        let aircraft = match &common.config {
            Some(path) => {
                let bytes = read(path)?;
                let aircraft = Aircraft::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
                batch.input(path.display().to_string(), bytes);
                let base = path.parent().unwrap_or(Path::new("."));
                for t in &aircraft.config.tables {
                    let p = base.join(&t.path);
                    batch.input(p.display().to_string(), read(&p)?);
                }
                aircraft
            }
            None => {
                batch.input("builtin:case_study", CASE_STUDY_TOML);
                Aircraft::case_study()
            }
        };
        let exec = if common.sequential { Execution::Sequential } else { Execution::Parallel };
        batch.option("sequential", common.sequential);
        Ok(Self { aircraft, exec, batch })
    }

    /// Read an input file and record it in the manifest.
    pub fn input_text(&mut self, path: &Path) -> Result<String, String> {
        let bytes = read(path)?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| format!("{}: {e}", path.display()))?;
        self.batch.input(path.display().to_string(), bytes);
        Ok(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Inboard,
    Outboard,
    Left,
    Right,
}

impl From<PolicyArg> for ConstraintPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Inboard => ConstraintPolicy::InboardFrozen,
            PolicyArg::Outboard => ConstraintPolicy::OutboardFrozen,
            PolicyArg::Left => ConstraintPolicy::LeftFrozen,
            PolicyArg::Right => ConstraintPolicy::RightFrozen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Dihedral,
    Sweep,
}

impl From<ChannelArg> for MorphChannel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Dihedral => MorphChannel::Dihedral,
            ChannelArg::Sweep => MorphChannel::Sweep,
        }
    }
}

/// Parse `lo,hi` into an ordered pair.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `lo,hi`, got `{s}`"));
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("`{}`: {e}", parts[0]))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("`{}`: {e}", parts[1]))?;
    if !(lo <= hi) {
        return Err(format!("range `{s}` is empty"));
    }
    Ok((lo, hi))
}

/// Trim-target options shared by `trim`, `trimspace` and `stability`.
#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// Airspeed in m/s.
    #[arg(long, default_value_t = 25.0)]
    pub airspeed: f64,
    /// Dihedral of the frozen wing, rad.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Which wing keeps the fixed dihedral.
    #[arg(long, value_enum, default_value_t = PolicyArg::Inboard)]
    pub policy: PolicyArg,
    /// Morphing angle solved for on the actuated wing.
    #[arg(long, value_enum, default_value_t = ChannelArg::Dihedral)]
    pub channel: ChannelArg,
}

impl TargetArgs {
    pub fn record(&self, batch: &mut OutputBatch) {
        batch.option("airspeed", self.airspeed);
        batch.option("gamma", self.gamma);
        batch.option("policy", format!("{:?}", self.policy));
        batch.option("channel", format!("{:?}", self.channel));
    }
}
