//! `kpe`: generate states, measure and detect (k+1)-partite entanglement,
//! and tabulate the detection degrees of noisy GHZ and W families.

mod args;
mod commands;
mod input;
mod table;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Failure of a command, mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or invalid input (exit 2), or a capacity guard (exit 3).
    Core(kpe_core::Error),
    Usage(String),
    /// Anything that went wrong after the input was accepted (exit 1).
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_capacity() => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<kpe_core::Error> for CliError {
    fn from(e: kpe_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kpe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
