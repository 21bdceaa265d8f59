use clap::Args;
use morphwing::trim::{sweep_trim_space, MorphChannel, SweepOptions, TrimSpaceGrid};
use morphwing::Error;

use crate::context::{parse_range, CommonArgs, Context, TargetArgs};
use crate::plot::{Plot, Series};

/// Lattice options shared by `trimspace` and `stability --grid`.
#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    /// Angle-of-attack range `lo,hi`, rad.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-0.8,0.9")]
    pub alpha_range: (f64, f64),
    /// Sideslip range `lo,hi`, rad.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-0.8,0.8")]
    pub beta_range: (f64, f64),
    /// Lattice spacing, degrees.
    #[arg(long, default_value_t = 2.0)]
    pub step_deg: f64,
}

impl LatticeArgs {
    pub fn options(&self, target: &TargetArgs, channel: MorphChannel, ctx: &Context) -> SweepOptions {
        SweepOptions {
            alpha_range: self.alpha_range,
            beta_range: self.beta_range,
            step: self.step_deg.to_radians(),
            airspeed: target.airspeed,
            dihedral_constraint: target.gamma,
            policy: target.policy.into(),
            channel,
            exec: ctx.exec,
        }
    }

    pub fn record(&self, ctx: &mut Context) {
        ctx.batch.option("alpha_range", format!("{},{}", self.alpha_range.0, self.alpha_range.1));
        ctx.batch.option("beta_range", format!("{},{}", self.beta_range.0, self.beta_range.1));
        ctx.batch.option("step_deg", self.step_deg);
    }
}

#[derive(Debug, Args)]
pub struct TrimSpaceArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Sweep both morphing channels and report whether one region contains the other.
    #[arg(long)]
    pub compare_channels: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Sweep a trim space; a failed seed is an empty space, not an error.
pub fn sweep_or_empty(ctx: &Context, opts: &SweepOptions) -> Result<Option<TrimSpaceGrid>, String> {
    match sweep_trim_space(&ctx.aircraft, opts) {
        Ok(g) => Ok(Some(g)),
        Err(Error::FirstPointFailure(e)) => {
            eprintln!("warning: no trim at the lattice seed ({e}); the trimmed set is empty");
            Ok(None)
        }
        Err(e) => Err(e.to_string()),
    }
}

/// Closed outline of the trimmed region: the largest sideslip of each
/// alpha row going up, the smallest coming back down.
pub fn boundary(grid: &TrimSpaceGrid) -> (Vec<f64>, Vec<f64>) {
    let nb = grid.betas.len();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (i, a) in grid.alphas.iter().enumerate() {
        let trimmed: Vec<usize> = (0..nb).filter(|&j| grid.cell(i, j).is_trimmed()).collect();
        if let (Some(&lo), Some(&hi)) = (trimmed.first(), trimmed.last()) {
            upper.push((grid.betas[hi], *a));
            lower.push((grid.betas[lo], *a));
        }
    }
    lower.reverse();
    let mut pts = upper;
    pts.extend(lower);
    if let Some(&first) = pts.first() {
        pts.push(first);
    }
    pts.into_iter().unzip()
}

fn describe(grid: &TrimSpaceGrid) -> String {
    let (defect, unmatched) = grid.mirror_defect();
    format!(
        "{} channel: {} of {} nodes trimmed, area {:.4} rad^2, mirror defect {:.1e} ({} unmatched)",
        grid.channel.name(),
        grid.trimmed_count(),
        grid.cells.len(),
        grid.area(),
        defect,
        unmatched
    )
}

pub fn run(args: &TrimSpaceArgs) -> Result<(), String> {
    let mut ctx = Context::open(&args.common, "trimspace")?;
    args.target.record(&mut ctx.batch);
    args.lattice.record(&mut ctx);
    ctx.batch.option("compare_channels", args.compare_channels);
    let channels: Vec<MorphChannel> = if args.compare_channels {
        vec![MorphChannel::Dihedral, MorphChannel::Sweep]
    } else {
        vec![args.target.channel.into()]
    };
    let mut plot = Plot::new(
        format!("Trim space at {} m/s", args.target.airspeed),
        "beta [rad]",
        "alpha [rad]",
    );
    let mut grids = Vec::new();
    for channel in channels {
        let opts = args.lattice.options(&args.target, channel, &ctx);
        match sweep_or_empty(&ctx, &opts)? {
            Some(grid) => {
                println!("{}", describe(&grid));
                if grid.trimmed_count() == 0 {
                    eprintln!("warning: the {} channel trimmed no nodes", channel.name());
                }
                ctx.batch.file(format!("trimspace_{}.csv", channel.name()), grid.to_csv_string());
                let (b, a) = boundary(&grid);
                plot = plot.add(Series::line(format!("{} boundary", channel.name()), b, a));
                grids.push(grid);
            }
            None => {
                ctx.batch.file(
                    format!("trimspace_{}.csv", channel.name()),
                    format!("{}\n", morphwing::trim::TRIM_SPACE_HEADER),
                );
            }
        }
    }
    if let [dih, sweep] = grids.as_slice() {
        println!(
            "dihedral region contains sweep region: {}; sweep region contains dihedral region: {}",
            dih.contains(sweep),
            sweep.contains(dih)
        );
    }
    ctx.batch.file("boundary.svg", plot.to_svg());
    let manifest = ctx.batch.finish()?;
    println!("wrote {} files to {}", manifest.outputs.len() + 1, manifest.output_dir);
    Ok(())
}

