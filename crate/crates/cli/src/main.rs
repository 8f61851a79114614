use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Validation(String),
    /// Numerical or I/O failure; exit code 1.
    Internal(String),
}

impl From<cournot_core::Error> for CliError {
    fn from(err: cournot_core::Error) -> Self {
        if err.is_validation() {
            CliError::Validation(err.to_string())
        } else {
            CliError::Internal(err.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => m,
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let rendered = err.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:").trim()));
            return ExitCode::from(2);
        }
    };

    let (common, result) = match &cli.command {
        Command::Equilibrium(c) => (c, commands::equilibrium(c)),
        Command::Worth(c) => (c, commands::worth(c)),
        Command::Jstar(c) => (c, commands::jstar(c)),
        Command::Scan(c) => (c, commands::scan(c)),
        Command::Figure(f) => (&f.common, commands::figure(f)),
    };

    let written = result.and_then(|text| match &common.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
        }
        None => match std::io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::Internal(format!("cannot write output: {e}")))
            }
            _ => Ok(()),
        },
    });

    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", one_line(err.message()));
            ExitCode::from(err.exit_code())
        }
    }
}
