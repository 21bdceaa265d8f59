use std::path::PathBuf;

use clap::Args;
use morphwing::spectral::{
    amplitude_spectrum, assess_run, kappa_band, resample_uniform, unsteadiness_report, window,
    DEFAULT_KAPPA_THRESHOLD, DEFAULT_SAMPLE_RATE,
};

use crate::commands::qnpas::{fly_maneuver, load_maneuver, period_tag, spectrum_plot, unsteadiness_rows, UNSTEADINESS_HEADER};
use crate::context::{CommonArgs, Context};
use crate::plot::{Plot, Series};

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Fly this maneuver file and analyse its probes.
    #[arg(long, conflicts_with = "probe_csv", required_unless_present = "probe_csv")]
    pub maneuver: Option<PathBuf>,
    /// Analyse a recorded probe history (`t,phi_eff,airspeed`) instead.
    #[arg(long, requires_all = ["semichord", "period"])]
    pub probe_csv: Option<PathBuf>,
    /// Semichord of the probed section, m.
    #[arg(long)]
    pub semichord: Option<f64>,
    /// Maneuver period of the probe history, s.
    #[arg(long)]
    pub period: Option<f64>,
    /// Reduced-frequency threshold for quasisteady validity.
    #[arg(long, default_value_t = DEFAULT_KAPPA_THRESHOLD)]
    pub threshold: f64,
    /// Start of the analysis window, s.
    #[arg(long)]
    pub from: Option<f64>,
    /// End of the analysis window, s.
    #[arg(long)]
    pub to: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parse a `t,phi_eff,airspeed` history; reports the offending line.
fn parse_probe_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), String> {
    let (mut t, mut phi, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if n == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 {
            return Err(format!("line {}: expected 3 columns, found {}", n + 1, fields.len()));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("line {}: `{s}`: {e}", n + 1));
        t.push(num(fields[0])?);
        phi.push(num(fields[1])?);
        v.push(num(fields[2])?);
    }
    Ok((t, phi, v))
}

fn from_csv(args: &SpectraArgs, ctx: &mut Context, path: &PathBuf) -> Result<(), String> {
    let text = ctx.input_text(path)?;
    let (t, phi, v) = parse_probe_csv(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let (semichord, period) = (args.semichord.unwrap_or_default(), args.period.unwrap_or_default());
    let lo = args.from.unwrap_or(f64::NEG_INFINITY);
    let hi = args.to.unwrap_or(f64::INFINITY);
    for (k, val) in [("semichord", semichord), ("period", period), ("threshold", args.threshold)] {
        ctx.batch.option(k, val);
    }
    ctx.batch.option("window", format!("{lo},{hi}"));
    let (tw, pw) = window(&t, &phi, lo, hi);
    let (_, vw) = window(&t, &v, lo, hi);
    let dt = 1.0 / DEFAULT_SAMPLE_RATE;
    let (_, uniform) = resample_uniform(&tw, &pw, dt);
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let spectrum = amplitude_spectrum(&uniform, dt).map_err(|e| e.to_string())?;
    let ps = kappa_band(&spectrum, &label, semichord, &vw).map_err(|e| e.to_string())?;
    let report = unsteadiness_report(&ps, args.threshold, period).map_err(|e| e.to_string())?;
    let verdict = assess_run(std::slice::from_ref(&report));
    println!("{}", report.summary());
    println!("{}", verdict.summary());
    ctx.batch.file("spectrum.csv", ps.to_csv_string());
    let plot = Plot::new(format!("Spectrum of {label}"), "omega [rad/s]", "amplitude [rad]")
        .log_y()
        .add(Series::line(label, ps.omega.clone(), ps.amplitude.clone()));
    ctx.batch.file("spectrum.svg", plot.to_svg());
    Ok(())
}

pub fn run(args: &SpectraArgs) -> Result<(), String> {
    let mut ctx = Context::open(&args.common, "spectra")?;
    match (&args.probe_csv, &args.maneuver) {
        (Some(csv), _) => from_csv(args, &mut ctx, csv)?,
        (None, Some(path)) => {
            let spec = load_maneuver(&mut ctx, path)?;
            let (_, runs) = fly_maneuver(&ctx.aircraft, &spec, ctx.exec)?;
            let mut table = String::from(UNSTEADINESS_HEADER);
            table.push('\n');
            for run in &runs {
                let tag = period_tag(run.period);
                for (s, r) in &run.spectra {
                    println!("T = {} s, {}", run.period, r.summary());
                    ctx.batch.file(format!("spectra/{tag}_{}.csv", s.label.replace(':', "_")), s.to_csv_string());
                }
                println!("T = {} s: {}", run.period, run.assessment.summary());
                unsteadiness_rows(run, &mut table);
                ctx.batch.file(format!("spectra_{tag}.svg"), spectrum_plot(run).to_svg());
            }
            ctx.batch.file("unsteadiness.csv", table);
        }
        (None, None) => unreachable!("clap requires one input"),
    }
    let manifest = ctx.batch.finish()?;
    println!("wrote {} files to {}", manifest.outputs.len() + 1, manifest.output_dir);
    Ok(())
}
