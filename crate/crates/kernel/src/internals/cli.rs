//! Command-line parsing over the merged option table.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::services::params::{Config, ParameterSpec, Scope, Value};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("bad value `{text}` for option `{key}`")]
    BadValue { key: String, text: String },
    #[error("no input files")]
    NoInput,
}

/// Outcome of a successful parse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Help,
    Run(Config),
}

pub(crate) fn parse(args: &[String], options: &[ParameterSpec]) -> Result<Command, CliError> {
    let table: BTreeMap<&str, &ParameterSpec> = options.iter().map(|o| (o.key.as_str(), o)).collect();
    let mut config = Config {
        values: options.iter().map(|o| (o.key.clone(), o.default.clone())).collect(),
        ..Config::default()
    };
    let mut help = false;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if arg == "-help" {
            help = true;
            continue;
        }
        if !arg.starts_with('-') || arg == "-" {
            config.files.push(arg.clone());
            continue;
        }
        let spec = table.get(arg.as_str()).ok_or_else(|| CliError::UnknownOption(arg.clone()))?;
        let value = if spec.takes_value() {
            let text = it.next().ok_or_else(|| CliError::BadValue {
                key: arg.clone(),
                text: String::new(),
            })?;
            spec.parse_value(text).ok_or_else(|| CliError::BadValue {
                key: arg.clone(),
                text: text.clone(),
            })?
        } else {
            Value::Flag(true)
        };
        if let Scope::Plugin(p) = &spec.scope {
            if spec.key[1..] == *p && !config.enabled.contains(p) {
                config.enabled.push(p.clone());
            }
        }
        config.values.insert(arg.clone(), value);
    }
    if help {
        return Ok(Command::Help);
    }
    if config.files.is_empty() {
        return Err(CliError::NoInput);
    }
    Ok(Command::Run(config))
}

fn option_line(o: &ParameterSpec, out: &mut String) {
    let head = format!("{}{}", o.key, o.value_hint());
    let default = match &o.default {
        Value::Flag(_) => String::new(),
        v => format!(" (default {v})"),
    };
    let _ = writeln!(out, "  {head:<28} {}{default}", o.help);
}

/// Kernel options first, then one block per plugin sorted by name.
pub(crate) fn help_text(program: &str, options: &[ParameterSpec], plugins: &[(String, String, String)]) -> String {
    let mut out = format!("Usage: {program} [kernel options] [plugin options] <files...>\n\nKernel options:\n");
    option_line(
        &ParameterSpec::flag("-help", "print this help and exit"),
        &mut out,
    );
    for o in options.iter().filter(|o| o.scope == Scope::Kernel) {
        option_line(o, &mut out);
    }
    let mut sorted: Vec<&(String, String, String)> = plugins.iter().collect();
    sorted.sort();
    for (name, version, help) in sorted {
        let _ = write!(out, "\nPlugin {name} {version}: {help}\n");
        for o in options.iter().filter(|o| o.scope == Scope::Plugin(name.clone())) {
            option_line(o, &mut out);
        }
    }
    out
}
