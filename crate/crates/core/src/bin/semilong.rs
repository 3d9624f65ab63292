use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use semilong::config::load_config;
use semilong::run::{dispatch, Command, ErrorRecord};

/// Bayesian regression with ARMA, ARFIMA and ARTFIMA errors.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// fit, forecast, evaluate, simulate, qq-experiment, compare, spectrum or periodogram
    command: String,

    /// TOML run configuration
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set sampler.n_iter=2000`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Shorthand for `--set run_dir=...`
    #[arg(long)]
    run_dir: Option<PathBuf>,

    /// Shorthand for `--set seed=...`
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command: Command = match cli.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let mut overrides = cli.overrides.clone();
    if let Some(dir) = &cli.run_dir {
        overrides.push(format!("run_dir={:?}", dir.display().to_string()));
    }
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    let loaded = match load_config(cli.config.as_deref(), &overrides) {
        Ok(l) => l,
        Err(e) => {
            let rec = ErrorRecord::new(command, &e.within("cli-io", "loading the configuration"));
            eprintln!("{}", serde_json::to_string(&rec).expect("serializable"));
            return ExitCode::from(2);
        }
    };
    match dispatch(command, &loaded) {
        Ok(out) => {
            println!("{} complete: {} ({})", out.command, out.run_dir.display(), out.files.join(", "));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let rec = ErrorRecord::new(command, &e);
            eprintln!("{}", serde_json::to_string(&rec).expect("serializable"));
            ExitCode::FAILURE
        }
    }
}
