//! `kgz` command line: exact soliton states, time evolution, linearized
//! spectra, modulation tracking, and the backward-from-final-data
//! construction experiment, all driven by a TOML configuration with flag
//! overrides. Exit codes: 0 success, 2 configuration error, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgz_cli::commands;
use kgz_cli::config::{Overrides, RunConfig};
use kgz_cli::error::Result;

#[derive(Parser)]
#[command(
    name = "kgz",
    version,
    about = "Klein-Gordon-Zakharov soliton toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact soliton profiles and their stationarity residuals
    Soliton(CommonArgs),
    /// Integrate the system, logging conserved quantities
    Evolve(CommonArgs),
    /// Lowest eigenpairs of the linearized operators
    Spectrum(CommonArgs),
    /// Track modulation parameters along an evolution
    Modulate(CommonArgs),
    /// Backward-from-final-data multi-soliton construction
    Construct(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override system.alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Override system.beta
    #[arg(long)]
    beta: Option<f64>,
    /// Override grid.n
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Override grid.length
    #[arg(long)]
    length: Option<f64>,
    /// Override time.t0
    #[arg(long)]
    t0: Option<f64>,
    /// Override time.t1
    #[arg(long)]
    t1: Option<f64>,
    /// Override time.dt
    #[arg(long)]
    dt: Option<f64>,
    /// Override time.scheme (rk4, strang, lawson)
    #[arg(long)]
    scheme: Option<String>,
    /// Override output.dir
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Override output.stride
    #[arg(long)]
    stride: Option<u64>,
    /// Override spectrum.count
    #[arg(long)]
    count: Option<usize>,
    /// Override modulation.tol
    #[arg(long)]
    tol: Option<f64>,
    /// Override modulation.max_iter
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            alpha: self.alpha,
            beta: self.beta,
            n: self.grid_n,
            length: self.length,
            t0: self.t0,
            t1: self.t1,
            dt: self.dt,
            scheme: self.scheme.clone(),
            dir: self.out.clone(),
            stride: self.stride,
            count: self.count,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    fn load(&self) -> Result<RunConfig> {
        let mut config = RunConfig::load(&self.config)?;
        config.apply(&self.overrides())?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Soliton(args) => args.load().and_then(|c| commands::run_soliton(&c)),
        Command::Evolve(args) => args.load().and_then(|c| commands::run_evolve(&c)),
        Command::Spectrum(args) => args.load().and_then(|c| commands::run_spectrum(&c)),
        Command::Modulate(args) => args.load().and_then(|c| commands::run_modulate(&c)),
        Command::Construct(args) => args.load().and_then(|c| commands::run_construct(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
