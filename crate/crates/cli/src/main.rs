mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, Command, RunConfig};

/// Exit statuses: 0 success, 1 partial results, 2 invalid configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Partial,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Eigenform(a) | Command::Census(a) | Command::Model(a) | Command::Compare(a) => a,
    };
    let cfg = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(j) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Eigenform(_) => commands::eigenform(&cfg),
        Command::Census(_) => commands::census(&cfg),
        Command::Model(_) => commands::model(&cfg),
        Command::Compare(_) => commands::compare(&cfg),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
