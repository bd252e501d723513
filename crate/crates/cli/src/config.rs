//! Command-line parsing with an optional TOML config merged underneath.

use crate::args::Cli;
use crate::error::CliError;
use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, CommandFactory, FromArgMatches};
use std::ffi::OsString;

fn find_arg<'a>(cmd: &'a clap::Command, sub: &'a clap::Command, key: &str) -> Option<&'a Arg> {
    let long = key.replace('_', "-");
    let hit = |a: &&Arg| a.get_long().is_some_and(|l| l == key || l == long);
    sub.get_arguments().find(hit).or_else(|| cmd.get_arguments().find(hit))
}

fn render(key: &str, v: &toml::Value) -> Result<Vec<String>, CliError> {
    match v {
        toml::Value::String(s) => Ok(vec![s.clone()]),
        toml::Value::Integer(i) => Ok(vec![i.to_string()]),
        toml::Value::Float(f) => Ok(vec![f.to_string()]),
        toml::Value::Array(items) => {
            let parts: Result<Vec<Vec<String>>, CliError> = items.iter().map(|x| render(key, x)).collect();
            Ok(vec![parts?.concat().join(",")])
        }
        _ => Err(CliError::Validation(format!(
            "config key '{key}' has an unsupported value type"
        ))),
    }
}

fn explicit(m: &ArgMatches, id: &str) -> bool {
    m.try_get_raw(id).is_ok() && m.value_source(id) == Some(ValueSource::CommandLine)
}

/// Parses `argv`; clap errors (including --help) end the process with clap's
/// own exit code, which is 2 for usage errors.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, CliError> {
    let mut cmd = Cli::command();
    cmd.build();
    // Lenient first pass: required flags may still come from the config.
    let first = cmd.clone().ignore_errors(true).try_get_matches_from(&argv).ok();
    let path = first
        .as_ref()
        .filter(|m| m.subcommand().is_some())
        .and_then(|m| m.try_get_one::<std::path::PathBuf>("config").ok().flatten().cloned());
    let (Some(first), Some(path)) = (first, path) else {
        let m = cmd.try_get_matches_from(&argv).unwrap_or_else(|e| e.exit());
        return Cli::from_arg_matches(&m).map_err(|e| CliError::Validation(e.to_string()));
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    let (sub_name, sub_m) = first.subcommand().expect("a subcommand is required");
    let sub = cmd.find_subcommand(sub_name).expect("parsed subcommand exists");
    let mut extra: Vec<String> = Vec::new();
    let mut push = |key: &str, v: &toml::Value| -> Result<(), CliError> {
        let arg = find_arg(&cmd, sub, key)
            .filter(|a| a.get_id() != "config")
            .ok_or_else(|| CliError::Validation(format!("unknown config key '{key}' for {sub_name}")))?;
        let id = arg.get_id().as_str();
        if explicit(sub_m, id) || explicit(&first, id) {
            return Ok(());
        }
        let long = arg.get_long().expect("config keys map to long flags");
        if arg.get_action().takes_values() {
            extra.push(format!("--{long}"));
            extra.extend(render(key, v)?);
        } else {
            match v {
                toml::Value::Boolean(true) => extra.push(format!("--{long}")),
                toml::Value::Boolean(false) => {}
                _ => return Err(CliError::Validation(format!("config key '{key}' must be a boolean"))),
            }
        }
        Ok(())
    };
    for (key, value) in &table {
        match value {
            toml::Value::Table(t) if key == sub_name => {
                for (k, v) in t {
                    push(k, v)?;
                }
            }
            toml::Value::Table(_) if cmd.find_subcommand(key).is_some() => {}
            toml::Value::Table(_) => {
                return Err(CliError::Validation(format!("unknown config table [{key}]")));
            }
            v => push(key, v)?,
        }
    }
    let mut full = argv;
    full.extend(extra.into_iter().map(OsString::from));
    let merged = cmd.try_get_matches_from(&full).unwrap_or_else(|e| e.exit());
    Cli::from_arg_matches(&merged).map_err(|e| CliError::Validation(e.to_string()))
}
