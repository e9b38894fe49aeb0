mod args;
mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn parallelism(command: &Command) -> Option<usize> {
    let common = match command {
        Command::Scan(a) => &a.common,
        Command::Rv(a) => &a.common,
        Command::Mixing(a) => &a.common,
        Command::Firstvisit(a) => &a.common,
        Command::Whichvertex(a) => &a.common,
        Command::Contract(a) => &a.common,
        Command::Properties(a) => &a.common,
        Command::Ruin(a) => &a.common,
    };
    common.parallel
}

fn real_main() -> Result<(), CliError> {
    let argv = config::inject_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism(&cli.command).unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    pool.install(|| commands::run(&cli.command))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vacant: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
