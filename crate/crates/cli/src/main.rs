use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nesim_cli::config::{ExperimentConfig, Mode};
use nesim_cli::experiment::{
    check_params, reproduce_example1, reproduce_example2, run_experiment, summary_text, Overrides,
};
use nesim_cli::CliError;

#[derive(Parser)]
#[command(
    name = "nesim",
    version,
    about = "Distributed Nash-equilibrium seeking over a communication graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (TOML)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the game/init seed
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Writes the iteration trace to this CSV path
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Overrides the stopping or comparison tolerance
    #[arg(long, value_name = "REAL")]
    tol: Option<f64>,
    /// Overrides the iteration budget
    #[arg(long, value_name = "N")]
    max_iter: Option<u64>,
    /// Records every N-th iteration in the trace
    #[arg(long, value_name = "N")]
    record_every: Option<u64>,
    /// Sizes the worker thread pool
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the experiment described by a config file
    Run(CommonArgs),
    /// Seeded 20-firm competition reproduction
    Example1(CommonArgs),
    /// Congestion-pricing reproduction with a baseline comparison
    Example2(CommonArgs),
    /// Prints the parameter theory for a config without running it
    CheckParams(CommonArgs),
    /// Runs the configured experiment head-to-head against the baseline
    Compare(CommonArgs),
}

fn overrides_of(args: &CommonArgs) -> Overrides {
    Overrides {
        seed: args.seed,
        out: args.out.clone(),
        tol: args.tol,
        max_iter: args.max_iter,
        record_every: args.record_every,
    }
}

fn load_config(args: &CommonArgs, subcommand: &str) -> Result<ExperimentConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("{} requires --config PATH", subcommand)))?;
    ExperimentConfig::from_path(path)
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let args = match &cli.command {
        Command::Run(a)
        | Command::Example1(a)
        | Command::Example2(a)
        | Command::CheckParams(a)
        | Command::Compare(a) => a,
    };
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {}", e)))?;
    }
    let overrides = overrides_of(args);
    let summary = match &cli.command {
        Command::Run(args) => {
            let config = load_config(args, "run")?;
            run_experiment(&config, &overrides)?.summary().to_vec()
        }
        Command::Compare(args) => {
            let mut config = load_config(args, "compare")?;
            config.mode = Mode::Compare;
            run_experiment(&config, &overrides)?.summary().to_vec()
        }
        Command::CheckParams(args) => {
            let config = load_config(args, "check-params")?;
            check_params(&config, &overrides)?.summary
        }
        Command::Example1(_) => reproduce_example1(&overrides)?.summary,
        Command::Example2(_) => reproduce_example2(&overrides)?.summary,
    };
    Ok(summary_text(&summary))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(text) => {
            print!("{}", text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}
