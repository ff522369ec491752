use casimir_cli::commands::{self, Context};
use casimir_cli::config::ExperimentConfig;
use casimir_cli::CliError;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "casimir", version, about = "Trapped-ion simulation of the dynamical Casimir effect")]
struct Cli {
    /// Experiment configuration (TOML); defaults to the bundled reference set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides output.directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "CASIMIR_CHAIN_THREADS")]
    threads: Option<usize>,
    /// Seed for the readout sampling noise.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Relative integrator tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Symplectic defect accepted before refusing a Bogoliubov map.
    #[arg(long, global = true)]
    symplectic_tol: Option<f64>,
    /// Moore completeness defect that triggers a warning.
    #[arg(long, global = true)]
    completeness_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium positions, couplings and mode spectrum.
    ChainInfo,
    /// Radial coefficients chi_i at a time or drive phase.
    ChiProfile {
        /// Simulation time (units of 1/sqrt(k-bar/m)); the drive starts at 0.
        #[arg(long, allow_negative_numbers = true)]
        time: Option<f64>,
        /// Drive phase omega_D (t - t1) in radians.
        #[arg(long, conflicts_with = "time")]
        phase: Option<f64>,
    },
    /// Final mode occupations against drive frequency, chain and mirror.
    Sweep {
        /// Override sweep.points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Mode 1 occupation over time at the configured drive frequency.
    Timeseries,
    /// Cavity length and depth equivalent to the driven chain.
    Match,
    /// Electric-field-noise heating budget.
    Heating,
    /// Sideband readout of the post-drive phonon distribution.
    ReadoutSim {
        /// 1-based mode; defaults to readout.mode.
        #[arg(long)]
        mode: Option<usize>,
    },
    /// Print the bundled reference configuration.
    PrintConfig,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::paper(),
    };
    if let Some(t) = cli.rel_tol {
        config.numerics.rel_tol = t;
    }
    if let Some(t) = cli.symplectic_tol {
        config.numerics.symplectic_tol = t;
    }
    if let Some(t) = cli.completeness_tol {
        config.moore.completeness_threshold = t;
    }
    config.validate()?;
    let ctx = Context::new(config, cli.out, cli.threads, cli.seed);
    match cli.command {
        Command::ChainInfo => commands::chain_info(&ctx),
        Command::ChiProfile { time, phase } => commands::chi_profile(&ctx, time, phase),
        Command::Sweep { points } => commands::sweep(&ctx, points),
        Command::Timeseries => commands::timeseries(&ctx),
        Command::Match => commands::matching(&ctx),
        Command::Heating => commands::heating(&ctx),
        Command::ReadoutSim { mode } => commands::readout_sim(&ctx, mode),
        Command::PrintConfig => Ok(casimir_cli::config::PAPER_CFG.to_string()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("casimir: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
