use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use morphwing::exec::{self, Execution};
use morphwing::guidance::{
    build_schedule, evaluate_tracking, observed_angles, ControlSchedule, ManeuverSpec, TrackingReport,
};
use morphwing::sim::Trajectory;
use morphwing::spectral::{analyze_probes, assess_run, ProbeSpectrum, RunAssessment, UnsteadinessReport};
use morphwing::Aircraft;

use crate::context::{CommonArgs, Context};
use crate::plot::{Plot, Series, Style};

#[derive(Debug, Args)]
pub struct QnpasArgs {
    /// Maneuver file (TOML).
    #[arg(long)]
    pub maneuver: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// One period of a maneuver, flown and analysed.
pub struct FlownRun {
    pub period: f64,
    pub schedule: ControlSchedule,
    pub trajectory: Trajectory,
    pub tracking: TrackingReport,
    pub spectra: Vec<(ProbeSpectrum, UnsteadinessReport)>,
    pub assessment: RunAssessment,
}

pub fn period_tag(period: f64) -> String {
    format!("T{period}")
}

pub fn load_maneuver(ctx: &mut Context, path: &PathBuf) -> Result<ManeuverSpec, String> {
    let text = ctx.input_text(path)?;
    ManeuverSpec::from_toml_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Build the schedule once and fly it at every listed period.
pub fn fly_maneuver(aircraft: &Aircraft, spec: &ManeuverSpec, exec: Execution) -> Result<(ControlSchedule, Vec<FlownRun>), String> {
    let base = build_schedule(aircraft, &spec.schedule_spec()).map_err(|e| e.to_string())?;
    let opts = spec.simulation.integrator_options(aircraft);
    let periods = spec.period_list();
    let runs: Result<Vec<FlownRun>, String> = exec::map(exec, &periods, |&period| {
        let schedule = base.rescaled(period);
        let trajectory = schedule.fly(aircraft, &opts).map_err(|e| format!("T = {period} s: {e}"))?;
        let span = schedule.spec.tracking_span();
        let tracking = evaluate_tracking(&trajectory, &|t| schedule.target(t), Some(span));
        let spectra = analyze_probes(&trajectory, span, period, spec.simulation.kappa_threshold, Execution::Sequential)
            .map_err(|e| format!("T = {period} s: {e}"))?;
        let reports: Vec<UnsteadinessReport> = spectra.iter().map(|(_, r)| r.clone()).collect();
        let assessment = assess_run(&reports);
        Ok(FlownRun {
            period,
            schedule,
            trajectory,
            tracking,
            spectra,
            assessment,
        })
    })
    .into_iter()
    .collect();
    Ok((base, runs?))
}

pub const UNSTEADINESS_HEADER: &str =
    "period,probe,target_omega,target_amplitude,peak_above_omega,peak_above_amplitude,power_ratio,critical_timescale,judged";

pub fn unsteadiness_rows(run: &FlownRun, out: &mut String) {
    for (_, r) in &run.spectra {
        let judged = !run.assessment.inactive.contains(&r.label);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            run.period,
            r.label,
            r.target_omega,
            r.target_amplitude,
            r.peak_above_omega.map(|w| w.to_string()).unwrap_or_default(),
            r.peak_above_amplitude,
            r.power_ratio,
            r.critical_timescale,
            judged
        );
    }
}

pub fn spectrum_plot(run: &FlownRun) -> Plot {
    let mut plot = Plot::new(
        format!("Probe spectra, T = {} s", run.period),
        "omega [rad/s]",
        "amplitude [rad]",
    )
    .log_y();
    for (s, r) in &run.spectra {
        if run.assessment.inactive.contains(&r.label) {
            continue;
        }
        plot = plot.add(Series::line(s.label.clone(), s.omega.clone(), s.amplitude.clone()));
    }
    plot
}

fn probe_file(tag: &str, label: &str) -> String {
    format!("spectra/{tag}_{}.csv", label.replace(':', "_"))
}

pub fn run(args: &QnpasArgs) -> Result<(), String> {
    let mut ctx = Context::open(&args.common, "qnpas")?;
    let spec = load_maneuver(&mut ctx, &args.maneuver)?;
    let (base, runs) = fly_maneuver(&ctx.aircraft, &spec, ctx.exec)?;

    let weight = ctx.aircraft.weight();
    ctx.batch.file("knots.csv", base.to_csv_string());
    let end = spec.path.end_phase(spec.loops);
    let samples = (end * 400.0).ceil() as usize;
    let mut locus = String::from("phase,alpha,beta,roll,airspeed\n");
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    for k in 0..=samples {
        let phase = end * k as f64 / samples as f64;
        let p = spec.path.at_phase(phase);
        let _ = writeln!(locus, "{phase},{},{},{},{}", p.alpha, p.beta, p.roll, p.airspeed);
        la.push(p.alpha);
        lb.push(p.beta);
    }
    ctx.batch.file("target_locus.csv", locus);

    let mut table = String::from(
        "period,alpha_rms,alpha_max,beta_rms,beta_max,roll_rms,roll_max,orientation_rms,peak_thrust,thrust_weight_ratio,worst_power_ratio,unsteady\n",
    );
    let mut unsteady = String::from(UNSTEADINESS_HEADER);
    unsteady.push('\n');
    println!("{}: {} knots, peak thrust {:.3} N ({:.3} of weight)", spec.name, base.times.len(), base.peak_thrust(), base.peak_thrust() / weight);
    println!("{:>8} {:>11} {:>11} {:>11} {:>11} {:>13}", "T [s]", "alpha RMS", "beta RMS", "roll RMS", "orient RMS", "worst ratio");
    let mut locus_plot = Plot::new(format!("{}: orientation locus", spec.name), "beta [rad]", "alpha [rad]")
        .add(Series::line("target", lb, la).with_style(Style::Dashed));
    let mut banners = Vec::new();
    for run in &runs {
        let tag = period_tag(run.period);
        let tr = &run.tracking;
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            run.period,
            tr.alpha.rms,
            tr.alpha.max,
            tr.beta.rms,
            tr.beta.max,
            tr.roll.rms,
            tr.roll.max,
            tr.orientation_rms(),
            run.schedule.peak_thrust(),
            run.schedule.peak_thrust() / weight,
            run.assessment.worst_ratio,
            run.assessment.flagged()
        );
        println!(
            "{:>8} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>13.3e}",
            run.period,
            tr.alpha.rms,
            tr.beta.rms,
            tr.roll.rms,
            tr.orientation_rms(),
            run.assessment.worst_ratio
        );
        unsteadiness_rows(run, &mut unsteady);
        banners.push(format!("T = {} s: {}", run.period, run.assessment.summary()));

        ctx.batch.file(format!("knots_{tag}.csv"), run.schedule.to_csv_string());
        ctx.batch.file(format!("trajectory_{tag}.csv"), run.trajectory.to_csv_string());
        for (s, _) in &run.spectra {
            ctx.batch.file(probe_file(&tag, &s.label), s.to_csv_string());
        }
        let flown: Vec<(f64, f64, f64)> = run.trajectory.states.iter().map(observed_angles).collect();
        let t = run.trajectory.times.clone();
        let targets: Vec<_> = t.iter().map(|&x| run.schedule.target(x)).collect();
        locus_plot = locus_plot.add(Series::line(
            format!("flown, T = {} s", run.period),
            flown.iter().map(|f| f.1).collect(),
            flown.iter().map(|f| f.0).collect(),
        ));
        let history = Plot::new(format!("{}: tracking, T = {} s", spec.name, run.period), "t [s]", "angle [rad]")
            .add(Series::line("alpha target", t.clone(), targets.iter().map(|p| p.alpha).collect()).with_style(Style::Dashed))
            .add(Series::line("alpha", t.clone(), flown.iter().map(|f| f.0).collect()))
            .add(Series::line("beta target", t.clone(), targets.iter().map(|p| p.beta).collect()).with_style(Style::Dashed))
            .add(Series::line("beta", t.clone(), flown.iter().map(|f| f.1).collect()))
            .add(Series::line("roll", t, flown.iter().map(|f| f.2).collect()));
        ctx.batch.file(format!("tracking_{tag}.svg"), history.to_svg());
        ctx.batch.file(format!("spectra_{tag}.svg"), spectrum_plot(run).to_svg());
    }
    ctx.batch.file("tracking.csv", table);
    ctx.batch.file("unsteadiness.csv", unsteady);
    ctx.batch.file("locus.svg", locus_plot.to_svg());
    for b in banners {
        println!("{b}");
    }
    let manifest = ctx.batch.finish()?;
    println!("wrote {} files to {}", manifest.outputs.len() + 1, manifest.output_dir);
    Ok(())
}
