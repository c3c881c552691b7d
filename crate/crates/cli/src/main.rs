mod args;
mod commands;
mod error;
mod report;
mod verify;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command, RunConfig};
use error::CliError;
use report::Report;

fn run(cli: &Cli, cfg: &RunConfig) -> Result<bool, CliError> {
    let mut report = Report::new(cfg);
    match &cli.command {
        Command::Geometry => commands::geometry(cfg, &mut report)?,
        Command::Contextuality => commands::contextuality(cfg, &mut report)?,
        Command::Game(args) => commands::game(cfg, args, &mut report)?,
        Command::Invariant => commands::invariant(cfg, &mut report)?,
        Command::VerifyAll => verify::run(cfg, &mut report),
    }
    let text = report.render(cfg.format)?;
    match &cli.global.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            // help and version go to stdout with exit code 0, the rest is
            // a usage error
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let cfg = RunConfig::new(&cli, &matches);
    match run(&cli, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("eloily: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("eloily: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
