//! `sideband`: command-line front end for the sideband-core library.
//!
//! Each subcommand writes `<out-dir>/<name>.csv` and a `<name>.json` sidecar
//! holding the tool version, the resolved parameters and the seed. Failures
//! print a JSON error record on stderr and exit with status 1.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use config::resolve;
use failure::Failure;
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "sideband", version, about = "Raman sideband spectroscopy and cooling in a two-wave lattice")]
struct Cli {
    /// JSON object with parameters for the subcommand; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: $SIDEBAND_OUT_DIR or .]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Base name of the output files [default: the subcommand name]
    #[arg(long, global = true)]
    name: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trap eigenfrequencies, axis rotation and projections
    Eigen(EigenArgs),
    /// Branch frequencies and blue-sideband areas against cavity power
    ScanCrossing(ScanArgs),
    /// Synthetic Raman spectrum
    SynthSpectrum(SynthArgs),
    /// Seeded Gaussian noise on a spectrum CSV
    AddNoise(NoiseArgs),
    /// Lorentzian fit of a spectrum CSV
    FitSpectrum(FitSpectrumArgs),
    /// Avoided-crossing fit of a scan CSV
    FitCrossing(FitCrossingArgs),
    /// Sideband-area model fit of a scan CSV
    FitAreas(FitAreasArgs),
    /// Temperature and mean excitation from sideband areas
    Thermometry(ThermometryArgs),
    /// Monte Carlo Raman cooling
    Cool(CoolArgs),
    /// Saturation kernel χ(θ)
    ChiTable(ChiArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eigen(_) => "eigen",
            Command::ScanCrossing(_) => "scan-crossing",
            Command::SynthSpectrum(_) => "synth-spectrum",
            Command::AddNoise(_) => "add-noise",
            Command::FitSpectrum(_) => "fit-spectrum",
            Command::FitCrossing(_) => "fit-crossing",
            Command::FitAreas(_) => "fit-areas",
            Command::Thermometry(_) => "thermometry",
            Command::Cool(_) => "cool",
            Command::ChiTable(_) => "chi-table",
        }
    }
}

fn run(cli: &Cli) -> Result<Summary, Failure> {
    let out = Output {
        dir: cli.out_dir.clone().unwrap_or_else(default_out_dir),
        name: cli.name.clone().unwrap_or_else(|| cli.command.name().to_string()),
    };
    let file = cli.config.as_deref();
    match &cli.command {
        Command::Eigen(a) => eigen(&resolve(file, a)?, &out),
        Command::ScanCrossing(a) => scan_crossing(&resolve(file, a)?, &out),
        Command::SynthSpectrum(a) => synth_spectrum(&resolve(file, a)?, &out),
        Command::AddNoise(a) => add_noise_cmd(&resolve(file, a)?, &out),
        Command::FitSpectrum(a) => fit_spectrum(&resolve(file, a)?, &out),
        Command::FitCrossing(a) => fit_crossing(&resolve(file, a)?, &out),
        Command::FitAreas(a) => fit_areas(&resolve(file, a)?, &out),
        Command::Thermometry(a) => thermometry(&resolve(file, a)?, &out),
        Command::Cool(a) => cool(&resolve(file, a)?, &out),
        Command::ChiTable(a) => chi_table(&resolve(file, a)?, &out),
    }
    .map(|mut summary| {
        summary.push(("csv".into(), out.csv_path().display().to_string()));
        summary
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            for (k, v) in summary {
                println!("{k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
