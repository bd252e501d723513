pub mod classify;
pub mod cs_check;
pub mod dmpk;
pub mod lie;
pub mod sample;
pub mod stats;

use crate::args::{Cli, Command};
use crate::error::CliError;

/// Whether the command draws random numbers at all.
fn randomized(c: &Command) -> bool {
    match c {
        Command::Sample(_) => true,
        Command::Stats(a) => a.surrogate.is_some() && a.input.is_none(),
        Command::Dmpk(a) => dmpk::needs_seed(a),
        Command::Classify(_) | Command::CsCheck(_) | Command::LieFixtures(_) => false,
    }
}

/// The explicit seed, or a fresh one from OS entropy that is logged and then
/// recorded like an explicit one.
fn resolve_seed(cli: &Cli) -> Result<Option<u64>, CliError> {
    if !randomized(&cli.command) {
        return Ok(cli.seed);
    }
    match cli.seed {
        Some(s) => Ok(Some(s)),
        None if cli.strict => Err(CliError::Validation("--strict requires --seed for this command".into())),
        None => {
            let s: u64 = rand::random();
            eprintln!("symrmt: no --seed given, using {s}");
            Ok(Some(s))
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let seed = resolve_seed(cli)?;
    match &cli.command {
        Command::Sample(a) => sample::run(a, seed.expect("sample is randomized")),
        Command::Stats(a) => stats::run(a, seed),
        Command::Classify(a) => classify::run(a),
        Command::Dmpk(a) => dmpk::run(a, seed),
        Command::CsCheck(a) => cs_check::run(a),
        Command::LieFixtures(a) => lie::run(a),
    }
}
