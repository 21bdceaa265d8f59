use std::fmt::Write as _;

use clap::Args;
use morphwing::sim::IntegratorOptions;
use morphwing::stability::{
    analyze_point, linearize, modal_analysis, stability_csv, stability_map, StabilityRecord,
};
use morphwing::trim::{solve_from_rest, TrimTarget};

use crate::commands::trimspace::{sweep_or_empty, LatticeArgs};
use crate::context::{CommonArgs, Context, TargetArgs};
use crate::plot::{Plot, Series, Style};

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Angle of attack of the trim point, rad.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Sideslip of the trim point, rad.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta: f64,
    /// Analyse every trimmed node of a lattice instead of one point.
    #[arg(long)]
    pub grid: bool,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

const EIGEN_HEADER: &str = "real,imag,natural_frequency,damping_ratio,period,label";

fn point(args: &StabilityArgs, ctx: &mut Context) -> Result<(), String> {
    ctx.batch.option("alpha", args.alpha);
    ctx.batch.option("beta", args.beta);
    let t = &args.target;
    let target = TrimTarget::general(args.alpha, args.beta, t.airspeed, t.gamma, t.policy.into(), t.channel.into());
    let trim = solve_from_rest(&ctx.aircraft, &target).map_err(|e| format!("refusing to analyse an untrimmed point: {e}"))?;
    let j = linearize(&ctx.aircraft, &trim).map_err(|e| e.to_string())?;
    let modes = modal_analysis(&j, t.airspeed);
    let mut csv = String::from(EIGEN_HEADER);
    csv.push('\n');
    println!("{} eigenvalues at alpha {:.4}, beta {:.4} rad:", modes.modes.len(), args.alpha, args.beta);
    for m in &modes.modes {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:?}",
            m.eigenvalue.re,
            m.eigenvalue.im,
            m.natural_frequency,
            m.damping_ratio,
            m.period(),
            m.label
        );
        println!(
            "  {:>12.5} {:+12.5}i  zeta {:>8.4}  {:?}",
            m.eigenvalue.re, m.eigenvalue.im, m.damping_ratio, m.label
        );
    }
    println!(
        "  {} (largest real part {:.4e})",
        if modes.is_stable() { "stable" } else { "UNSTABLE" },
        modes.max_real()
    );
    let record = analyze_point(&ctx.aircraft, &trim, &IntegratorOptions::default()).map_err(|e| e.to_string())?;
    println!(
        "  static gradients: alpha {:.4}, beta {:.4}; yaw-kick deviations: heading {:.4}, roll {:.4} rad",
        record.static_alpha, record.static_beta, record.delta_psi, record.delta_phi
    );
    ctx.batch.file("eigenvalues.csv", csv);
    ctx.batch.file("stability.csv", stability_csv(&[record]));
    let eig = modes.eigenvalues();
    let plot = Plot::new("Eigenvalues", "real [1/s]", "imaginary [rad/s]").add(
        Series::line("eigenvalues", eig.iter().map(|e| e.re).collect(), eig.iter().map(|e| e.im).collect())
            .with_style(Style::Markers),
    );
    ctx.batch.file("eigenvalues.svg", plot.to_svg());
    Ok(())
}

fn grid(args: &StabilityArgs, ctx: &mut Context) -> Result<(), String> {
    args.lattice.record(ctx);
    let opts = args.lattice.options(&args.target, args.target.channel.into(), ctx);
    let records: Vec<StabilityRecord> = match sweep_or_empty(ctx, &opts)? {
        Some(g) => stability_map(&ctx.aircraft, &g, &IntegratorOptions::default(), ctx.exec),
        None => Vec::new(),
    };
    if records.is_empty() {
        eprintln!("warning: no trimmed nodes to analyse");
    }
    let stable = records.iter().filter(|r| r.max_real_eig < 0.0).count();
    println!("{} trimmed nodes analysed, {} stable", records.len(), stable);
    ctx.batch.file("stability_map.csv", stability_csv(&records));
    let split = |want: bool| {
        let pick: Vec<&StabilityRecord> = records.iter().filter(|r| (r.max_real_eig < 0.0) == want).collect();
        (pick.iter().map(|r| r.beta).collect(), pick.iter().map(|r| r.alpha).collect())
    };
    let (sb, sa) = split(true);
    let (ub, ua) = split(false);
    let plot = Plot::new("Stability over the trim space", "beta [rad]", "alpha [rad]")
        .add(Series::line("stable", sb, sa).with_style(Style::Markers))
        .add(Series::line("unstable", ub, ua).with_style(Style::Markers));
    ctx.batch.file("stability_map.svg", plot.to_svg());
    let spiral = Plot::new("Roll deviation after a yaw kick", "beta [rad]", "delta_phi [rad]").add(
        Series::line(
            "nodes",
            records.iter().map(|r| r.beta).collect(),
            records.iter().map(|r| r.delta_phi).collect(),
        )
        .with_style(Style::Markers),
    );
    ctx.batch.file("roll_deviation.svg", spiral.to_svg());
    Ok(())
}

pub fn run(args: &StabilityArgs) -> Result<(), String> {
    let mut ctx = Context::open(&args.common, "stability")?;
    args.target.record(&mut ctx.batch);
    ctx.batch.option("grid", args.grid);
    if args.grid {
        grid(args, &mut ctx)?;
    } else {
        point(args, &mut ctx)?;
    }
    let manifest = ctx.batch.finish()?;
    println!("wrote {} files to {}", manifest.outputs.len() + 1, manifest.output_dir);
    Ok(())
}
