use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qve::commands::{self, Output};
use qve::config::{RunConfig, Settings};

#[derive(Parser, Debug)]
#[command(name = "qve", version, about = "Solve quadratic vector equations and analyze their densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Advisory checks of the structural assumptions on the kernel.
    Check(Settings),
    /// Solve on a tau x eta grid; writes grid.csv (and spectral.json).
    Solve(Settings),
    /// Density and support; writes density.csv and support.json.
    Density(Settings),
    /// Classify the points where the density vanishes; writes singularities.json.
    Classify(Settings),
    /// Compare sampled random matrix spectra with the density; writes mc_report.json.
    ValidateMc(Settings),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (settings, f): (Settings, fn(&RunConfig) -> anyhow::Result<Output>) = match cli.command {
        Command::Check(s) => (s, commands::check),
        Command::Solve(s) => (s, commands::solve),
        Command::Density(s) => (s, commands::density),
        Command::Classify(s) => (s, commands::classify),
        Command::ValidateMc(s) => (s, commands::validate_mc),
    };
    let cfg = settings.merged()?.resolve()?;
    rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global()?;
    log::debug!("running on {} worker(s), {} x {} grid", cfg.workers, cfg.taus.len(), cfg.etas.len());
    f(&cfg)?.write(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QVE_LOG", "error")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(qve::exit_code(&err) as u8)
        }
    }
}
