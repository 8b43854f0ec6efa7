use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use chaos_cover::experiment::{describe, run, ExperimentConfig, ExperimentKind};
use chaos_cover::Error;

/// Run a chaos-game cover-time experiment from a TOML config.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per configuration (overrides the config).
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Experiment kind (overrides the config).
    #[arg(long)]
    experiment: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve(args: Args) -> Result<ExperimentConfig, Error> {
    let mut config = match &args.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = &args.experiment {
        config.experiment = Some(e.parse::<ExperimentKind>()?);
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.trials.is_some() {
        config.trials = args.trials;
    }
    if args.out.is_some() {
        config.out = args.out;
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match resolve(args).and_then(|c| run(&c)) {
        Ok(report) => {
            print!("{}", describe(&report));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::from(2)
        }
    }
}
