//! Library side of the `thermoq` command-line tool.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;
use std::fs;
use std::io;

pub use config::{resolve, Cli, Command, RunArgs, RunConfig, Subcommand};
pub use output::{Cell, Table};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(thermoq_core::Error),
    Io(io::Error),
}

impl CliError {
    /// 2 for bad input, 1 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(thermoq_core::Error::InvalidParameter(_)) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<thermoq_core::Error> for CliError {
    fn from(e: thermoq_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Applies `THERMOQ_THREADS` (unset or 0 leaves rayon's default).
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("THERMOQ_THREADS must be a non-negative integer, got {v:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

/// Computes the table and writes the CSV (and SVG when asked).
pub fn execute(cfg: &RunConfig) -> Result<Table, CliError> {
    let table = commands::run(cfg)?;
    match &cfg.output_path {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            table.write_csv(io::BufWriter::new(file))?;
            if cfg.emit_svg {
                if let Some(svg) = output::render_svg(&table) {
                    fs::write(path.with_extension("svg"), svg)?;
                }
            }
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(table)
}
