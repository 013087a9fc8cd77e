use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no wells: the potential has no real minima")]
    NoWells,

    #[error("root finder did not converge (last iterate {last})")]
    RootNotConverged { last: f64 },

    #[error("asymmetric depths unsupported: minima at V = {left} and V = {right}")]
    AsymmetricDepths { left: f64, right: f64 },

    #[error("minimum at x = {location} is not harmonic (V'' = {curvature})")]
    NonHarmonicMinimum { location: f64, curvature: f64 },

    #[error("potential dips below well floor at x = {x} (V - floor = {excess})")]
    BelowWellFloor { x: f64, excess: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("|delta| = {delta:e} is too small for the recursion; use the symmetric-limit path")]
    SmallDelta { delta: f64 },

    #[error(
        "catastrophic cancellation: result is {ratio:e} of the largest term; \
         use the recursive or quadrature path, or extended precision"
    )]
    Cancellation { ratio: f64 },

    #[error("depth {requested} exceeds the cap {cap}")]
    DepthExceeded { requested: usize, cap: usize },

    #[error("triangle too shallow: central coefficient {index} has no column terms")]
    InsufficientDepth { index: usize },

    #[error("domain too small: boundary potential {boundary} below required {required}")]
    DomainTooSmall { boundary: f64, required: f64 },

    #[error("eigenvalue bisection failed inside Gershgorin bounds [{lower}, {upper}]")]
    BisectionFailed { lower: f64, upper: f64 },

    #[error("only {usable} usable points for the scaling fit (need 3); excluded lambdas {excluded:?}")]
    InsufficientPoints { usable: usize, excluded: Vec<f64> },
}
