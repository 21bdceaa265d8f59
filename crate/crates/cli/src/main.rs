//! `morphwing`: simulation, trim, stability and nose-pointing maneuver
//! analysis for multibody morphing-wing aircraft.

mod commands;
mod context;
mod manifest;
mod plot;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{qnpas, simulate, spectra, stability, trim, trimspace};

#[derive(Debug, Parser)]
#[command(name = "morphwing", version, about = "Flight dynamics workbench for morphing-wing aircraft")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the equations of motion for a simulation case.
    Simulate(simulate::SimulateArgs),
    /// Solve one trim point, or continue a longitudinal trim over alpha.
    Trim(trim::TrimArgs),
    /// Map the trimmable (alpha, beta) region on a lattice.
    Trimspace(trimspace::TrimSpaceArgs),
    /// Linear modes and perturbation metrics of a trim point or a whole trim space.
    Stability(stability::StabilityArgs),
    /// Build, fly and assess a quasistatic nose-pointing schedule.
    Qnpas(qnpas::QnpasArgs),
    /// Spectra of effective angle of attack and the quasisteady-validity check.
    Spectra(spectra::SpectraArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Trim(a) => trim::run(a),
        Command::Trimspace(a) => trimspace::run(a),
        Command::Stability(a) => stability::run(a),
        Command::Qnpas(a) => qnpas::run(a),
        Command::Spectra(a) => spectra::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
