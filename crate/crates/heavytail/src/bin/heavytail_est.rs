//! Monte Carlo experiment runner.
//!
//! Exit codes: 0 on success, 1 on an invalid configuration, 2 when the
//! output path cannot be written.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heavytail::error::Error;
use heavytail::experiment::{run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "heavytail-est", version, about = "Seeded Monte Carlo experiments for robust estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a key-value config file.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the group count (clears any configured delta).
    #[arg(long)]
    k: Option<usize>,
    /// Override the confidence level (clears any configured k).
    #[arg(long)]
    delta: Option<f64>,
    /// Override the regularization weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Override the sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Override the dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Override the output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) {
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.k {
        cfg.k = Some(k);
        cfg.delta = None;
    }
    if let Some(delta) = args.delta {
        cfg.delta = Some(delta);
        cfg.k = None;
    }
    if let Some(lambda) = args.lambda {
        cfg.lambda = lambda;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(out) = &args.out {
        cfg.output_path = out.clone();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let mut cfg = match ExperimentConfig::load(&args.config) {
                Ok(cfg) => cfg,
                Err(err) => {
                    eprintln!("error: {err}");
                    return ExitCode::from(1);
                }
            };
            apply_overrides(&mut cfg, &args);
            match run_experiment(&cfg) {
                Ok(output) => {
                    println!("wrote {}", cfg.output_path.display());
                    if !output.summary.is_empty() {
                        println!("{}", output.summary);
                    }
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    match err {
                        Error::Io(_) => ExitCode::from(2),
                        _ => ExitCode::from(1),
                    }
                }
            }
        }
    }
}
