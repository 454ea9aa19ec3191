mod args;
mod commands;
mod config;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, SweepTarget};
use commands::Output;
use config::RunConfig;

/// Exit status 2 for bad input, 1 for numerical failure.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

fn run(cli: Cli) -> Result<(Output, Option<std::path::PathBuf>), Failure> {
    match cli.command {
        Command::Simulate(a) => {
            let run = RunConfig::resolve(&a.model, None, a.steps)?;
            Ok((commands::simulate(&run, a.pathwise, a.plot_script.as_deref())?, run.out))
        }
        Command::PriceBond(a) => {
            let run = RunConfig::resolve(&a.model, None, None)?;
            let out = if a.sweep.sweep {
                commands::sweep(&run, SweepTarget::Bond, &a.sweep)?
            } else {
                commands::price_bond(&run)?
            };
            Ok((out, run.out))
        }
        Command::PriceWarrant(a) => {
            let run = RunConfig::resolve(&a.model, Some(&a.terms), None)?;
            let out = if a.sweep.sweep {
                commands::sweep(&run, SweepTarget::Warrant, &a.sweep)?
            } else {
                commands::price_warrant(&run)?
            };
            Ok((out, run.out))
        }
        Command::Sweep(a) => {
            let run = RunConfig::resolve(&a.model, Some(&a.terms), None)?;
            Ok((commands::sweep(&run, a.target, &a.sweep)?, run.out))
        }
        Command::Validate(a) => Ok((commands::validate(a.quick, a.variant.as_deref(), a.seed.unwrap_or(42))?, a.out)),
    }
}

fn emit(output: &Output, out: Option<&std::path::Path>) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, &output.body)?,
        None => io::stdout().lock().write_all(&output.body)?,
    }
    if let Some((path, script)) = &output.plot {
        fs::write(path, script)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((output, out)) => {
            if let Err(e) = emit(&output, out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if output.failed {
                eprintln!("validation failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun with --help for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
