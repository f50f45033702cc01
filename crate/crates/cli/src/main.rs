//! `dgtime`: solve, convergence, conditioning and comparison runs for the
//! dG time integrators, driven by a JSON config.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dgtime", version, about = "Discontinuous Galerkin time integration studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for randomly generated problems; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Sample the discrete solution of each method.
    Solve,
    /// Error sweep over time steps and degrees, with fitted slopes.
    Convergence,
    /// Condition numbers of the slab matrices.
    Conditioning,
    /// Degree sweep at a fixed time step, methods side by side.
    Compare,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = RunConfig::load(path, cli.seed)?;
    let problem = cfg.problem.build()?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    match cli.command {
        Command::Solve => commands::cmd_solve(&problem, &cfg, &cli.out),
        Command::Convergence => commands::cmd_convergence(&problem, &cfg, &cli.out),
        Command::Conditioning => commands::cmd_conditioning(&problem, &cfg, &cli.out),
        Command::Compare => commands::cmd_compare(&problem, &cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dgtime: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
