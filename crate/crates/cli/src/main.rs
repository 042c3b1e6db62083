mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use tfconc::{Error, Execution};

use args::{Cli, Command};
use output::Report;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NumericDomain(_) => 3,
        Error::ConstructionFailure { .. } => 4,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let exec = Execution::default();
    let global = &cli.global;
    let report: Report = match &cli.command {
        Command::Analyze(a) => commands::analyze(a, global, exec)?,
        Command::ConstructExact(a) => commands::construct_exact(a, global, exec)?,
        Command::Separate(a) => commands::separate(a, global, exec)?,
        Command::Compactness(a) => commands::compactness(a, global, exec)?,
        Command::FrameBounds(a) => commands::frame_bounds(a, global, exec)?,
        Command::TailSum(a) => commands::tail_sum_cmd(a, global)?,
        Command::Verify(a) => {
            let (outcome, report) = commands::verify(a, global, exec)?;
            print!("{}", outcome.table());
            if global.out.is_some() {
                output::emit(&report, global, &cli.command)?;
            }
            return Ok(match outcome.first_failure() {
                Some(check) => {
                    eprintln!("verification failed: first failing check is {}", check.name);
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            });
        }
    };
    output::emit(&report, global, &cli.command)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("tfconc {}: {err}", cli.command.name());
            ExitCode::from(exit_code(&err))
        }
    }
}
