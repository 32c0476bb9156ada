mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let cmd = &cli.command;
    let settings = Settings::resolve(cmd.name(), cmd.common().config.as_deref(), cmd.flag_pairs())?;
    if let Some(threads) = settings.get::<usize>("threads")? {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))?;
    }
    commands::run(cmd, settings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
