//! `instanton-gas`: sweeps, exact verification runs and plot-ready CSV/JSON
//! output for the multi-instanton double-well library.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Format};
use config::RunConfig;
use error::{CliError, CliResult};

const THREADS_VAR: &str = "INSTANTON_GAS_THREADS";

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let mut format = sniff_format(&raw);
    match execute(raw, &mut format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit::Clean) => ExitCode::SUCCESS,
        Err(Exit::Failed(e)) => {
            report(&e, format);
            ExitCode::from(e.exit_code as u8)
        }
    }
}

enum Exit {
    /// `--help` or `--version` already printed.
    Clean,
    Failed(CliError),
}

impl From<CliError> for Exit {
    fn from(e: CliError) -> Self {
        Exit::Failed(e)
    }
}

fn execute(raw: Vec<OsString>, format: &mut Format) -> Result<(), Exit> {
    let mut cli = parse(raw)?;
    let mut output_path = cli.output.clone();
    if let Some(path) = cli.config.take() {
        if cli.command.is_some() {
            return Err(CliError::usage(
                "usage",
                "--config replaces the subcommand; give one or the other",
                Some("config"),
            )
            .into());
        }
        let config = RunConfig::load(&path)?;
        let from_file = parse(config.to_args()?)?;
        *format = cli.format.or(config.output_format).unwrap_or(Format::Json);
        output_path = output_path.or(config.output_path);
        cli.command = from_file.command;
    } else {
        *format = cli.format.unwrap_or(Format::Json);
    }
    let command = cli.command.ok_or_else(|| {
        CliError::usage(
            "unknown_command",
            format!("no command given; expected one of {}", args::Command::NAMES.join(", ")),
            Some("command"),
        )
    })?;
    configure_threads()?;
    let text = commands::run(&command)?.render(*format);
    match output_path {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()), "output"))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(format!("cannot write standard output: {e}"), "output"))?;
        }
    }
    Ok(())
}

fn parse(raw: Vec<OsString>) -> Result<Cli, Exit> {
    Cli::try_parse_from(raw).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            Exit::Clean
        }
        kind => {
            let code = match kind {
                ErrorKind::InvalidSubcommand => "unknown_command",
                ErrorKind::ArgumentConflict => "inconsistent_parameters",
                ErrorKind::ValueValidation | ErrorKind::InvalidValue => "invalid_parameter",
                _ => "usage",
            };
            let parameter = e.get(clap::error::ContextKind::InvalidArg).map(|a| {
                let text = a.to_string();
                let flag = text.split_whitespace().next().unwrap_or("").trim_start_matches('-');
                flag.split('=').next().unwrap_or("").to_owned()
            });
            let message = e.render().to_string();
            let message = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            Exit::Failed(CliError::usage(code, message, parameter.as_deref()))
        }
    })
}

/// The format requested on the raw command line, for reporting errors that
/// occur before parsing succeeds.
fn sniff_format(raw: &[OsString]) -> Format {
    let mut it = raw.iter().filter_map(|a| a.to_str());
    while let Some(a) = it.next() {
        let value = match a.strip_prefix("--format") {
            Some("") => it.next(),
            Some(rest) => rest.strip_prefix('='),
            None => continue,
        };
        return match value {
            Some("csv") => Format::Csv,
            Some("table") => Format::Table,
            _ => Format::Json,
        };
    }
    Format::Json
}

fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(
            "invalid_environment",
            format!("{THREADS_VAR} must be a positive integer, got {text:?}"),
            Some(THREADS_VAR),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage("invalid_environment", e.to_string(), Some(THREADS_VAR)))
}

fn report(e: &CliError, format: Format) {
    let text = match format {
        Format::Json => serde_json::to_string(e).expect("error serializes"),
        _ => match &e.parameter {
            Some(p) => format!("error [{}] ({p}): {}", e.code, e.message),
            None => format!("error [{}]: {}", e.code, e.message),
        },
    };
    eprintln!("{text}");
}
