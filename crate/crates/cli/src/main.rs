mod args;
mod commands;
mod failure;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::{code, Failure};

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Presets(a) => commands::presets(&a),
        Command::Analyze(a) => commands::analyze(&a.resolve()?),
        Command::Simulate(a) => commands::simulate(&a.resolve()?),
        Command::Diagnose(a) => commands::diagnose(&a.resolve()?),
        Command::Sweep(a) => commands::sweep(&a.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(code::CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
