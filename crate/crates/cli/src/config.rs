use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::args::{Command, Format};
use crate::error::{CliError, CliResult};

/// A run read from a `--config` file.
///
/// ```json
/// {"command": "spectrum",
///  "parameters": {"omega0": 1, "omega1": 2, "B": 0.3},
///  "output_format": "table"}
/// ```
///
/// Parameter names are the flag names without dashes; arrays become
/// comma-separated lists and `true` switches a flag on.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub output_format: Option<Format>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display()), "config"))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::usage("invalid_config", e.to_string(), Some("config")))?;
        if !Command::NAMES.contains(&config.command.as_str()) {
            return Err(CliError::usage(
                "unknown_command",
                format!(
                    "unknown command {:?}; expected one of {}",
                    config.command,
                    Command::NAMES.join(", ")
                ),
                Some("command"),
            ));
        }
        Ok(config)
    }

    /// The equivalent command line, so both routes share one parser.
    pub fn to_args(&self) -> CliResult<Vec<OsString>> {
        let mut args: Vec<OsString> = vec!["instanton-gas".into(), self.command.clone().into()];
        for (name, value) in &self.parameters {
            let flag = format!("--{name}");
            let text = match value {
                Value::Null | Value::Bool(false) => continue,
                Value::Bool(true) => {
                    args.push(flag.into());
                    continue;
                }
                Value::Number(x) => x.to_string(),
                Value::String(s) => s.clone(),
                Value::Array(items) => items
                    .iter()
                    .map(|v| match v {
                        Value::Number(x) => Ok(x.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(scalar_expected(name)),
                    })
                    .collect::<CliResult<Vec<_>>>()?
                    .join(","),
                Value::Object(_) => return Err(scalar_expected(name)),
            };
            args.push(format!("{flag}={text}").into());
        }
        Ok(args)
    }
}

fn scalar_expected(name: &str) -> CliError {
    CliError::usage(
        "invalid_config",
        format!("parameter {name:?} must be a number, string, boolean or list of those"),
        Some(name),
    )
}
