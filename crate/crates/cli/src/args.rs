use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "instanton-gas",
    version,
    about = "Multi-instanton sums, exact coefficient checks and Schrodinger benchmarks for asymmetric double wells"
)]
pub struct Cli {
    /// Output format [default: json]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Read the whole run configuration from a JSON file
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-time integrals I(n, m)
    Moments(MomentsArgs),
    /// Exact rational checks of the coefficient triangle and column identities
    TriangleVerify(TriangleArgs),
    /// Multi-instanton partial sums against the closed amplitude
    Sum(SumArgs),
    /// Doublet energies, or the coupling recovered from a measured gap
    Spectrum(SpectrumArgs),
    /// One point of the benchmark family, solved numerically
    Benchmark(BenchmarkArgs),
    /// ln B' against S_inst over a lambda sweep
    Scaling(ScalingArgs),
}

impl Command {
    pub const NAMES: [&'static str; 6] =
        ["moments", "triangle-verify", "sum", "spectrum", "benchmark", "scaling"];
}

/// Well frequencies and coupling; `B` or the pair (`K`, `S-inst`).
#[derive(Debug, Clone, Args)]
pub struct WellArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub omega0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega1: Option<f64>,
    /// Coupling B = K exp(-S_inst)
    #[arg(long = "B", allow_negative_numbers = true)]
    pub coupling: Option<f64>,
    /// One-instanton prefactor
    #[arg(long = "K", allow_negative_numbers = true)]
    pub prefactor: Option<f64>,
    /// One-instanton action
    #[arg(long = "S-inst", allow_negative_numbers = true)]
    pub action: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MomentMethod {
    Closed,
    Recursive,
    Quadrature,
    /// Pick the evaluation suited to |delta| T
    Auto,
    /// Closed, recursive and quadrature side by side
    All,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub wells: WellArgs,
    /// Euclidean time extent
    #[arg(long = "T", allow_negative_numbers = true)]
    pub time: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value_t = MomentMethod::Auto)]
    pub method: MomentMethod,
    /// Emit every (n', m') with n' <= n, m' <= m
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct TriangleArgs {
    #[arg(long)]
    pub depth: Option<usize>,
    /// B / delta as an exact ratio p/q
    #[arg(long)]
    pub ratio: Option<String>,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    #[command(flatten)]
    pub wells: WellArgs,
    #[arg(long = "T", allow_negative_numbers = true)]
    pub time: Option<f64>,
    /// Number of terms; omitted, the sum runs until the terms are negligible
    #[arg(long)]
    pub terms: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumMethod {
    /// Instanton result E = (w0 + w1)/4 -+ sqrt(delta^2/4 + B^2)
    Instanton,
    /// Eigenvalues of [[w0/2, B], [B, w1/2]]
    Hamiltonian,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub wells: WellArgs,
    #[arg(long, value_enum, default_value_t = SpectrumMethod::Instanton)]
    pub method: SpectrumMethod,
    /// Measured gap; recovers B' instead of computing energies
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["coupling", "prefactor", "action"])]
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long = "x-min", allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long = "x-max", allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Barrier scale in lambda (x^2 - 1)^2 (x^2 + b x + 1)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Asymmetry, |b| < 2
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Comma-separated, strictly ascending
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Prefactor used for predicted gaps
    #[arg(long = "K", allow_negative_numbers = true)]
    pub k_hint: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}
