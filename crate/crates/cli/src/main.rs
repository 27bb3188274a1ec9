//! `reupload`: simulate, analyse, train and benchmark re-uploading QNNs from JSON configs.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use commands::Failure;

#[derive(Parser)]
#[command(name = "reupload", version, about)]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate F(x, θ) over a grid or point list
    Simulate,
    /// Count harmonics symbolically and by DFT, and cross-check them
    Spectrum,
    /// Fit a circuit to a dataset CSV
    Train {
        /// Dataset CSV with header x1,…,xn,f
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Teacher-student benchmark and Γ sweeps
    Benchmark,
}

fn load<T: DeserializeOwned>(path: Option<&Path>) -> Result<T, Failure> {
    let path = path.ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Simulate => {
            let mut c: config::SimulateConfig = load(cfg)?;
            c.seed = cli.seed.unwrap_or(c.seed);
            commands::simulate(&c, &cli.out)
        }
        Command::Spectrum => {
            let mut c: config::SpectrumConfig = load(cfg)?;
            c.seed = cli.seed.unwrap_or(c.seed);
            commands::spectrum(&c, &cli.out)
        }
        Command::Train { data } => {
            let mut c: config::TrainRunConfig = load(cfg)?;
            c.seed = cli.seed.unwrap_or(c.seed);
            commands::train_cmd(&c, data.as_deref(), &cli.out)
        }
        Command::Benchmark => {
            let mut c: config::BenchmarkConfig = load(cfg)?;
            c.seed = cli.seed.unwrap_or(c.seed);
            commands::benchmark(&c, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
