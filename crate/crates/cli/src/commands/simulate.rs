use std::path::PathBuf;

use clap::Args;
use morphwing::airframe::{AircraftState, Convention, EulerAngles};
use morphwing::controls::ControlVector;
use morphwing::guidance::{observed_angles, SimulationSettings};
use morphwing::sim::{simulate, EventKind};
use morphwing::trim::{solve_from_rest, solve_trim, ConstraintPolicy, MorphChannel, TrimTarget};
use nalgebra::Vector3;
use serde::Deserialize;

use crate::context::{CommonArgs, Context};
use crate::plot::{Plot, Series};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation case file (TOML).
    #[arg(long)]
    pub case: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
enum TrimMode {
    Pitch,
    #[default]
    General,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrimStart {
    #[serde(default)]
    mode: TrimMode,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    beta: f64,
    #[serde(default = "default_airspeed")]
    airspeed: f64,
    #[serde(default)]
    dihedral_constraint: f64,
    #[serde(default = "default_policy")]
    policy: ConstraintPolicy,
    #[serde(default = "default_channel")]
    channel: MorphChannel,
}

fn default_airspeed() -> f64 {
    25.0
}

fn default_policy() -> ConstraintPolicy {
    ConstraintPolicy::InboardFrozen
}

fn default_channel() -> MorphChannel {
    MorphChannel::Dihedral
}

/// Initial state in the stored layout: earth-frame velocity and position,
/// Euler angles `[pitch, yaw, roll]` and their rates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialState {
    #[serde(default)]
    velocity: [f64; 3],
    #[serde(default)]
    euler_rates: [f64; 3],
    #[serde(default)]
    position: [f64; 3],
    #[serde(default)]
    euler: [f64; 3],
    #[serde(default = "default_convention")]
    convention: Convention,
}

fn default_convention() -> Convention {
    Convention::Zyx321
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Environment {
    air_density: Option<f64>,
    gravity: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationCase {
    name: String,
    duration: f64,
    trim: Option<TrimStart>,
    initial: Option<InitialState>,
    controls: Option<ControlVector>,
    #[serde(default)]
    environment: Environment,
    #[serde(default)]
    simulation: SimulationSettings,
}

fn parse_case(text: &str) -> Result<SimulationCase, String> {
    let case: SimulationCase = toml::from_str(text).map_err(|e| e.to_string())?;
    if !(case.duration > 0.0) {
        return Err("duration must be positive".into());
    }
    if case.trim.is_none() && case.initial.is_none() {
        return Err("a case needs a [trim] or an [initial] section".into());
    }
    Ok(case)
}

pub fn run(args: &SimulateArgs) -> Result<(), String> {
    let mut ctx = Context::open(&args.common, "simulate")?;
    let text = ctx.input_text(&args.case)?;
    let case = parse_case(&text).map_err(|e| format!("{}: {e}", args.case.display()))?;

    let mut aircraft = ctx.aircraft.clone();
    if let Some(rho) = case.environment.air_density {
        aircraft.config.air_density = rho;
    }
    if let Some(g) = case.environment.gravity {
        aircraft.config.gravity = g;
    }

    let (mut z0, mut controls) = (None, ControlVector::default());
    if let Some(t) = &case.trim {
        let point = match t.mode {
            TrimMode::Pitch => solve_trim(&aircraft, &TrimTarget::pitch(t.alpha, t.airspeed), &ControlVector::default()),
            TrimMode::General => solve_from_rest(
                &aircraft,
                &TrimTarget::general(t.alpha, t.beta, t.airspeed, t.dihedral_constraint, t.policy, t.channel),
            ),
        }
        .map_err(|e| format!("initial trim: {e}"))?;
        if !point.converged {
            return Err(format!(
                "initial trim did not converge (active limits: {:?})",
                point.active_limit_names()
            ));
        }
        println!("trimmed start: residual {:.2e}, thrust {:.4} N", point.residual_norm, point.controls.thrust);
        z0 = Some(point.target.state());
        controls = point.controls;
    }
    if let Some(s) = &case.initial {
        z0 = Some(AircraftState {
            vel: Vector3::from(s.velocity),
            euler_rates: Vector3::from(s.euler_rates),
            pos: Vector3::from(s.position),
            euler: EulerAngles::new(s.euler[0], s.euler[1], s.euler[2], s.convention),
        });
    }
    if let Some(c) = &case.controls {
        controls = c.clone();
    }
    let z0 = z0.expect("validated above");

    let opts = case.simulation.integrator_options(&aircraft);
    let traj = simulate(&aircraft, &controls, &z0, (0.0, case.duration), &opts).map_err(|e| e.to_string())?;

    ctx.batch.option("case", &case.name);
    ctx.batch.file("trajectory.csv", traj.to_csv_string());
    let mut events = String::from("t,kind,detail\n");
    for e in &traj.events {
        match &e.kind {
            EventKind::PoleSwitch { from, to } => events.push_str(&format!("{},pole_switch,{}->{}\n", e.t, from.tag(), to.tag())),
            EventKind::Warning(w) => events.push_str(&format!("{},warning,\"{}\"\n", e.t, w.replace('"', "'"))),
        }
    }
    ctx.batch.file("events.csv", events);
    for p in &traj.probes {
        ctx.batch.file(format!("probes/{}.csv", p.label.replace(':', "_")), traj.probe_csv_string(p));
    }

    let t = traj.times.clone();
    let euler: Vec<[f64; 3]> = traj.states.iter().map(|s| s.euler.as_array()).collect();
    let attitude = Plot::new(format!("{}: Euler angles", case.name), "t [s]", "angle [rad]")
        .add(Series::line("pitch", t.clone(), euler.iter().map(|e| e[0]).collect()))
        .add(Series::line("yaw", t.clone(), euler.iter().map(|e| e[1]).collect()))
        .add(Series::line("roll", t.clone(), euler.iter().map(|e| e[2]).collect()));
    ctx.batch.file("attitude.svg", attitude.to_svg());
    let flow: Vec<(f64, f64, f64)> = traj.states.iter().map(observed_angles).collect();
    let angles = Plot::new(format!("{}: flow angles", case.name), "t [s]", "angle [rad]")
        .add(Series::line("alpha", t.clone(), flow.iter().map(|f| f.0).collect()))
        .add(Series::line("beta", t.clone(), flow.iter().map(|f| f.1).collect()));
    ctx.batch.file("flow_angles.svg", angles.to_svg());

    let end = traj.last();
    println!(
        "{}: {} samples over {} s, {} pole switches, final speed {:.4} m/s, final position [{:.2}, {:.2}, {:.2}] m",
        case.name,
        traj.len(),
        case.duration,
        traj.pole_switches(),
        end.vel.norm(),
        end.pos.x,
        end.pos.y,
        end.pos.z
    );
    let manifest = ctx.batch.finish()?;
    println!("wrote {} files to {}", manifest.outputs.len() + 1, manifest.output_dir);
    Ok(())
}
