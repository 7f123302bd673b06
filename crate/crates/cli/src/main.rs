mod cli;
mod commands;
mod table;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let parsed = cli::Cli::parse();
    match commands::run(parsed.command) {
        Ok(code) => code,
        Err(err) => err.report(),
    }
}
