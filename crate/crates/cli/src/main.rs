//! `ftn`: run FTN experiments from a flat TOML config and write plot-ready
//! CSV files with `.meta.toml` sidecars.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid configuration,
//! 3 ill-conditioned Gramian, 4 numeric failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_assignment, ExperimentConfig};
use crate::error::CliError;
use crate::output::Outputs;

#[derive(Parser)]
#[command(
    name = "ftn",
    version,
    about = "Faster-than-Nyquist signaling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gramian coefficients, symbol samples and eigenvalue summary.
    Gramian(Common),
    /// Worst-case outside energy sweep, worst-case and alternating signals.
    Localize(Common),
    /// Least-squares approximation of a delayed pulse by FTN pulses.
    Approx(Common),
    /// Monte Carlo BER of precoded FTN over AWGN.
    Simulate(Common),
    /// Naive FTN and precoded RRC capacity sweeps.
    Capacity(Common),
    /// Convergence of the precoded pulses to a sinc.
    EffectivePulse(Common),
}

#[derive(Args)]
struct Common {
    /// Flat TOML file; unknown keys are rejected.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Override a config key; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_assignment)]
    overrides: Vec<(String, String)>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Gramian(c) => ("gramian", c),
            Command::Localize(c) => ("localize", c),
            Command::Approx(c) => ("approx", c),
            Command::Simulate(c) => ("simulate", c),
            Command::Capacity(c) => ("capacity", c),
            Command::EffectivePulse(c) => ("effective-pulse", c),
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (name, common) = cli.command.parts();
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let cfg = ExperimentConfig::load(common.config.as_deref(), &overrides)?;
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }

    let mut out = Outputs::new(&common.out, name, &cfg)?;
    let result = match &cli.command {
        Command::Gramian(_) => commands::gramian(&cfg, &mut out),
        Command::Localize(_) => commands::localize(&cfg, &mut out),
        Command::Approx(_) => commands::approx(&cfg, &mut out),
        Command::Simulate(_) => commands::simulate(&cfg, &mut out),
        Command::Capacity(_) => commands::capacity(&cfg, &mut out),
        Command::EffectivePulse(_) => commands::effective(&cfg, &mut out),
    };
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(&e)
        }
    }
}
