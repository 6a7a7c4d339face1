mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Account(a) => commands::account(a),
        Command::Convert(a) => commands::convert(a),
        Command::Tradeoff(a) => commands::tradeoff(a),
        Command::Compare(a) => commands::compare_cmd(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dpgdp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
