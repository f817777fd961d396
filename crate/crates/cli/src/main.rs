//! `sphkern`: coefficient tables, Sobolev identification, kernel evaluation,
//! cubature studies and oracle validation from a JSON job config.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sphkern::{Route, Truncation};

use config::{Format, Job, JobConfig, Overrides};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "sphkern",
    version,
    about = "Isotropic positive-definite kernels on spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the d-Schoenberg and Fourier coefficient table.
    Coeffs(Flags),
    /// Fit the coefficient decay and report the Sobolev order.
    Identify(Flags),
    /// Evaluate the kernel and its truncated expansion on a θ grid.
    Eval(Flags),
    /// Worst-case errors, discrepancies and rate studies.
    Cubature(Flags),
    /// Cross-check routes, mass and reconstruction for one kernel.
    Validate(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON job description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel as JSON or `family:key=value,...`.
    #[arg(long)]
    kernel: Option<String>,
    /// Sphere dimension d.
    #[arg(long)]
    dim: Option<usize>,
    /// Largest degree M, or `auto`.
    #[arg(long, value_parser = parse_truncation)]
    truncation: Option<Truncation>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed of the random point generator.
    #[arg(long)]
    seed: Option<u64>,
    /// closed, projection or quadrature.
    #[arg(long, value_parser = parse_route)]
    route: Option<Route>,
}

fn parse_truncation(s: &str) -> Result<Truncation, String> {
    s.parse().map_err(|e: sphkern::Error| e.to_string())
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: sphkern::Error| e.to_string())
}

impl Flags {
    fn job(self) -> Result<Job, CliError> {
        let cfg = match &self.config {
            Some(p) => JobConfig::load(p)?,
            None => JobConfig::default(),
        };
        Job::resolve(
            cfg,
            Overrides {
                kernel: self.kernel,
                dim: self.dim,
                truncation: self.truncation,
                out: self.out,
                format: self.format,
                seed: self.seed,
                route: self.route,
            },
        )
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Coeffs(f) => commands::coeffs(&f.job()?),
        Command::Identify(f) => commands::identify(&f.job()?),
        Command::Eval(f) => commands::eval(&f.job()?),
        Command::Cubature(f) => commands::cubature(&f.job()?),
        Command::Validate(f) => commands::validate(&f.job()?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
