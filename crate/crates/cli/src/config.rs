//! Optional TOML configuration merged beneath command-line flags.
//!
//! Keys are flag names (`t_end_chitau` or `t-end-chitau`). A key is applied
//! only when the flag was not given on the command line, by appending it to
//! the argument list and parsing again, so config values go through the same
//! validation as flags.

use std::ffi::OsString;

use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches};

use crate::Cli;

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Config(String),
}

impl From<clap::Error> for ParseFailure {
    fn from(e: clap::Error) -> Self {
        ParseFailure::Clap(e)
    }
}

fn value_to_arg(key: &str, v: &toml::Value) -> Result<String, String> {
    Ok(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => format!("{f:?}"),
        toml::Value::Array(items) => items
            .iter()
            .map(|x| value_to_arg(key, x))
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        other => return Err(format!("`{key}`: unsupported value {other}")),
    })
}

pub fn parse_with_config(mut args: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let matches = Cli::command().try_get_matches_from(&args)?;
    let Some(path) = matches.get_one::<std::path::PathBuf>("config") else {
        return Ok(Cli::from_arg_matches(&matches)?);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseFailure::Config(format!("{}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| ParseFailure::Config(format!("{}: {e}", path.display())))?;

    let (sub_name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let root = Cli::command();
    let sub = root
        .find_subcommand(sub_name)
        .expect("parsed subcommand exists");
    let settable: Vec<&clap::Arg> = sub
        .get_arguments()
        .chain(root.get_arguments().filter(|a| a.is_global_set()))
        .filter(|a| a.get_long().is_some() && a.get_id() != "config")
        .collect();

    for (key, value) in &table {
        let id = key.replace('-', "_");
        let arg = settable
            .iter()
            .find(|a| a.get_id() == id.as_str())
            .ok_or_else(|| ParseFailure::Config(format!("unknown key `{key}` for `{sub_name}`")))?;
        if sub_matches.value_source(&id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let value = value_to_arg(key, value).map_err(ParseFailure::Config)?;
        log::debug!("config sets --{}={value}", arg.get_long().unwrap());
        args.push(format!("--{}={value}", arg.get_long().unwrap()).into());
    }

    let matches = Cli::command().try_get_matches_from(&args)?;
    Ok(Cli::from_arg_matches(&matches)?)
}
