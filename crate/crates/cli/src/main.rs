// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod error;
mod output;

use error::CliError;
use std::process::ExitCode;

/// Caps the rayon pool at RMT_THREADS workers when set.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RMT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Validation(format!("RMT_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(error::internal)
}

fn run() -> Result<(), CliError> {
    configure_threads()?;
    let cli = config::parse(std::env::args_os().collect())?;
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("symrmt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
