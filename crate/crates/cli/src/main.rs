mod args;
mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use args::{expand_config, Cli};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Computation(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Computation(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Computation(m) => write!(f, "computation failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<resetfpt::Error> for CliError {
    fn from(e: resetfpt::Error) -> Self {
        use resetfpt::Error::*;
        match e {
            Domain(_) | Validation(_) | Config(_) | DerivativeStep(_) => {
                CliError::Validation(e.to_string())
            }
            Convergence { .. } | Singular { .. } => CliError::Computation(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RESET_FPT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RESET_FPT_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run() -> Result<(), CliError> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    configure_threads()?;
    let doc = commands::run(&cli.command)?;
    let out = cli.command.output();
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    match &out.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            doc.write(out.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            doc.write(out.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("resetfpt: {e}");
            ExitCode::from(e.code())
        }
    }
}
