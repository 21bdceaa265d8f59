use std::fmt::Write as _;

use clap::Args;
use morphwing::controls::ControlVector;
use morphwing::trim::{continue_path, solve_from_rest, solve_trim, TrimPoint, TrimTarget};

use crate::context::{parse_range, CommonArgs, Context, TargetArgs};
use crate::plot::{Plot, Series};

#[derive(Debug, Args)]
pub struct TrimArgs {
    /// Angle of attack, rad.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Sideslip, rad.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Longitudinal trim only (thrust, elevator, symmetric incidence).
    #[arg(long)]
    pub pitch: bool,
    /// Continue a longitudinal trim over `lo,hi` in alpha instead of solving one point.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub alpha_sweep: Option<(f64, f64)>,
    /// Alpha spacing of the sweep, rad.
    #[arg(long, default_value_t = 0.01)]
    pub alpha_step: f64,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

const POINT_HEADER: &str =
    "alpha,beta,converged,residual,thrust,elevator,rudder,aileron,sweep_L,inc_L,dih_L,sweep_R,inc_R,dih_R,active_limits";

fn point_row(p: &TrimPoint) -> String {
    let c = &p.controls;
    let mut s = format!("{},{},{},{}", p.target.alpha, p.target.beta, p.converged, p.residual_norm);
    for v in [
        c.thrust,
        c.elevator,
        c.rudder,
        c.aileron,
        c.left.sweep,
        c.left.incidence,
        c.left.dihedral,
        c.right.sweep,
        c.right.incidence,
        c.right.dihedral,
    ] {
        let _ = write!(s, ",{v}");
    }
    let _ = writeln!(s, ",{}", p.active_limit_names().join(";"));
    s
}

pub fn run(args: &TrimArgs) -> Result<(), String> {
    let mut ctx = Context::open(&args.common, "trim")?;
    args.target.record(&mut ctx.batch);
    let t = &args.target;
    match args.alpha_sweep {
        None => {
            ctx.batch.option("alpha", args.alpha);
            ctx.batch.option("beta", args.beta);
            ctx.batch.option("pitch", args.pitch);
            let point = if args.pitch {
                if args.beta != 0.0 {
                    return Err("--pitch trims have zero sideslip".into());
                }
                solve_trim(&ctx.aircraft, &TrimTarget::pitch(args.alpha, t.airspeed), &ControlVector::default())
            } else {
                let target = TrimTarget::general(
                    args.alpha,
                    args.beta,
                    t.airspeed,
                    t.gamma,
                    t.policy.into(),
                    t.channel.into(),
                );
                solve_from_rest(&ctx.aircraft, &target)
            }
            .map_err(|e| e.to_string())?;
            println!(
                "alpha {:.4} rad ({:.2} deg), beta {:.4} rad: {}, residual {:.2e}",
                args.alpha,
                args.alpha.to_degrees(),
                args.beta,
                if point.converged { "trimmed" } else { "NOT trimmed" },
                point.residual_norm
            );
            let c = &point.controls;
            println!(
                "  thrust {:.4} N, elevator {:.4}, rudder {:.4}, incidence L/R {:.4}/{:.4}, sweep L/R {:.4}/{:.4}, dihedral L/R {:.4}/{:.4} rad",
                c.thrust, c.elevator, c.rudder, c.left.incidence, c.right.incidence, c.left.sweep, c.right.sweep, c.left.dihedral, c.right.dihedral
            );
            if !point.active_limits.is_empty() {
                println!("  active limits: {}", point.active_limit_names().join(", "));
            }
            ctx.batch.file("trim.csv", format!("{POINT_HEADER}\n{}", point_row(&point)));
        }
        Some((lo, hi)) => {
            if !(args.alpha_step > 0.0) {
                return Err("--alpha-step must be positive".into());
            }
            ctx.batch.option("alpha_sweep", format!("{lo},{hi}"));
            ctx.batch.option("alpha_step", args.alpha_step);
            let n = ((hi - lo) / args.alpha_step + 1e-9).floor() as usize;
            let targets: Vec<TrimTarget> = (0..=n)
                .map(|k| TrimTarget::pitch(lo + k as f64 * args.alpha_step, t.airspeed))
                .collect();
            let path = continue_path(&ctx.aircraft, &targets, &ControlVector::default()).map_err(|e| e.to_string())?;
            let mut csv = String::from("alpha,converged,thrust,incidence,elevator,active_limits\n");
            for p in &path {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    p.target.alpha,
                    p.converged,
                    p.controls.thrust,
                    p.controls.left.incidence,
                    p.controls.elevator,
                    p.active_limit_names().join(";")
                );
            }
            ctx.batch.file("envelope.csv", csv);
            let ok: Vec<&TrimPoint> = path.iter().filter(|p| p.converged).collect();
            let alphas: Vec<f64> = ok.iter().map(|p| p.target.alpha).collect();
            let thrust = Plot::new("Longitudinal trim: thrust", "alpha [rad]", "thrust [N]")
                .add(Series::line("thrust", alphas.clone(), ok.iter().map(|p| p.controls.thrust).collect()));
            let angles = Plot::new("Longitudinal trim: surfaces", "alpha [rad]", "angle [rad]")
                .add(Series::line("incidence", alphas.clone(), ok.iter().map(|p| p.controls.left.incidence).collect()))
                .add(Series::line("elevator", alphas, ok.iter().map(|p| p.controls.elevator).collect()));
            ctx.batch.file("envelope_thrust.svg", thrust.to_svg());
            ctx.batch.file("envelope_surfaces.svg", angles.to_svg());
            let last = path.last().expect("at least one target");
            if last.converged {
                println!("trimmed over the whole range up to alpha {:.4} rad", last.target.alpha);
            } else {
                println!(
                    "envelope ends before alpha {:.4} rad ({:.2} deg); active limits: {}",
                    last.target.alpha,
                    last.target.alpha.to_degrees(),
                    last.active_limit_names().join(", ")
                );
            }
        }
    }
    let manifest = ctx.batch.finish()?;
    println!("wrote {} files to {}", manifest.outputs.len() + 1, manifest.output_dir);
    Ok(())
}
