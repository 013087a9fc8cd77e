use instanton_core::Error;
use serde::Serialize;

/// Machine-readable failure: `{code, message, parameter}`.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub parameter: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(code: &'static str, message: impl Into<String>, parameter: Option<&str>) -> Self {
        Self {
            code,
            message: message.into(),
            parameter: parameter.map(str::to_owned),
            exit_code: 2,
        }
    }

    pub fn missing(parameter: &str, command: &str) -> Self {
        Self::usage(
            "missing_parameter",
            format!("`{command}` requires --{parameter}"),
            Some(parameter),
        )
    }

    pub fn io(message: impl Into<String>, parameter: &str) -> Self {
        Self {
            code: "io",
            message: message.into(),
            parameter: Some(parameter.to_owned()),
            exit_code: 1,
        }
    }
}

/// Core parameter names as spelled on the command line.
fn flag_name(name: &str) -> &str {
    match name {
        "S_inst" => "S-inst",
        "lambdas" => "lambdas",
        other => other,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, parameter, exit_code) = match &e {
            Error::InvalidParameter { name, .. } => ("invalid_parameter", Some(flag_name(name)), 2),
            Error::InvalidPotential(_) => ("invalid_potential", None, 2),
            Error::DepthExceeded { .. } => ("depth_exceeded", Some("depth"), 2),
            Error::NoWells => ("no_wells", None, 1),
            Error::RootNotConverged { .. } => ("root_not_converged", None, 1),
            Error::AsymmetricDepths { .. } => ("asymmetric_depths", None, 1),
            Error::NonHarmonicMinimum { .. } => ("non_harmonic_minimum", None, 1),
            Error::BelowWellFloor { .. } => ("below_well_floor", None, 1),
            Error::QuadratureNotConverged { .. } => ("quadrature_not_converged", None, 1),
            Error::SmallDelta { .. } => ("small_delta", None, 1),
            Error::Cancellation { .. } => ("cancellation", None, 1),
            Error::InsufficientDepth { .. } => ("insufficient_depth", Some("depth"), 1),
            Error::DomainTooSmall { .. } => ("domain_too_small", None, 1),
            Error::BisectionFailed { .. } => ("bisection_failed", None, 1),
            Error::InsufficientPoints { .. } => ("insufficient_points", Some("lambdas"), 1),
        };
        Self {
            code,
            message: e.to_string(),
            parameter: parameter.map(str::to_owned),
            exit_code,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
