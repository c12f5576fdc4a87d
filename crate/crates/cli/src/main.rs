use std::process::ExitCode;

use clap::Parser;
use thermoq_cli::{configure_threads, execute, resolve, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(std::env::var("THERMOQ_THREADS").ok().as_deref()).and_then(|_| {
        let (cmd, args) = cli.command.split();
        execute(&resolve(cmd, &args)?)
    });
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thermoq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
