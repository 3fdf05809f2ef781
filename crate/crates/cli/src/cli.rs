//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zerostab_core::{MethodSpec, Normalization};

use crate::parse::{FamilySpec, FloatList, Integrand, RationalList};

#[derive(Debug, Parser)]
#[command(
    name = "zerostab",
    version,
    about = "Zero-stability analysis of BDF methods on smooth nonuniform grids",
    long_about = "Zero-stability analysis of BDF methods on smooth nonuniform grids.\n\n\
        Reports go to stdout (or --out), diagnostics to stderr. JSON reports carry \
        `schema: 1`, keep a fixed key order and print floats as %.15e.\n\n\
        Exit status: 0 on success, 1 on a domain error (a JSON error object is printed \
        to stdout), 2 on a usage error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Variable-step coefficient rows (exact for --ratios and --uniform).
    ///
    /// CSV columns: row,j,ratios,alpha,beta. One line per coefficient j = 0..k,
    /// oldest first; `ratios` holds the row's step ratios separated by ';'.
    Coeffs(CoeffsArgs),
    /// Deflates coefficient rows by the backward difference.
    ///
    /// Reads --alpha or a `coeffs` JSON report (--input, '-' for stdin).
    /// CSV columns: row,j,gamma.
    Deflate(DeflateArgs),
    /// Stability certificate: extraneous roots, C0, S_j, w_max and N*.
    ///
    /// CSV columns: field,value (scalar fields only).
    Analyze(AnalyzeArgs),
    /// One homogeneous run of the direct and deflated recursions.
    ///
    /// CSV columns: N,sup_y,sup_u,growth_rate,amplification.
    Simulate(SimulateArgs),
    /// Boundedness sweep over doubling step counts.
    ///
    /// CSV columns: N,sup_y,sup_u,growth_rate,amplification. The verdict goes
    /// to stderr in CSV mode. STABLE means successive worst-case amplifications
    /// grow by at most a factor 1.05; the rule is a heuristic.
    Sweep(SweepArgs),
    /// Quadrature convergence study for y' = f(t).
    ///
    /// CSV columns: N,error,order. `order` is the local slope against the
    /// previous row and blank on the first.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Bdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    /// beta_k = 1.
    LeadingBeta,
    /// Denominator-free rows (k <= 2).
    Polynomial,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodName::Bdf)]
    pub method: MethodName,
    /// Step number.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub k: u8,
    /// Row scaling; defaults to polynomial for k <= 2 and leading-beta above.
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
}

impl MethodArgs {
    pub fn spec(&self) -> zerostab_core::Result<MethodSpec> {
        let spec = match self.method {
            MethodName::Bdf => MethodSpec::bdf(self.k as usize)?,
        };
        match self.normalization {
            None => Ok(spec),
            Some(NormalizationArg::LeadingBeta) => {
                spec.with_normalization(Normalization::LeadingBeta)
            }
            Some(NormalizationArg::Polynomial) => {
                spec.with_normalization(Normalization::Polynomial)
            }
        }
    }
}

/// Exactly one grid form per invocation.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct GridArgs {
    /// Grid family: identity, exp:c=C, power:a=A, sigmoid:s=S,a=A,m=M or geom:r=R.
    #[arg(long, value_name = "FAMILY")]
    pub grid: Option<FamilySpec>,
    /// Step ratios h_{n+1}/h_n, oldest first, exact (e.g. 1/2,3/2,0.8).
    #[arg(long, value_name = "LIST")]
    pub ratios: Option<RationalList>,
    /// Constant steps, optionally with the step count N.
    #[arg(long, value_name = "N", num_args = 0..=1)]
    pub uniform: Option<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepRange {
    /// Smallest step count.
    #[arg(long)]
    pub nmin: Option<usize>,
    /// Largest step count; doubles from --nmin while within it.
    #[arg(long, conflicts_with = "doublings")]
    pub nmax: Option<usize>,
    /// Number of doublings after --nmin [default: 4].
    #[arg(long)]
    pub doublings: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Step count for --grid; one row per step n = 0..N-k.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false, args = ["alpha", "input"])]
pub struct DeflateArgs {
    /// One alpha row, oldest first (exact rationals).
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub alpha: Option<RationalList>,
    /// A `coeffs` JSON report; '-' reads stdin.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Sample intervals for ||phi'/phi|| when the map has no analytic slope.
    #[arg(long, default_value_t = 100_000)]
    pub sampling: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorKind {
    /// Extraneous operator R_N.
    R,
    /// Coefficient operator A_N.
    A,
    /// Simple integrator D_N.
    D,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Step count (taken from --uniform N when given there).
    #[arg(long)]
    pub n: Option<usize>,
    /// Start values y_0..y_{k-1} [default: alternating +1, -1].
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub init: Option<FloatList>,
    /// Also write the grid (CSV columns n,t,h,r,v; JSON if PATH ends in .json).
    #[arg(long, value_name = "PATH")]
    pub grid_out: Option<PathBuf>,
    /// Also write an operator as `row col value` triplets.
    #[arg(long, value_name = "PATH")]
    pub operator_out: Option<PathBuf>,
    /// Operator written by --operator-out.
    #[arg(long, value_enum, default_value_t = OperatorKind::R)]
    pub operator: OperatorKind,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub range: SweepRange,
    /// Seed for the random start vectors.
    #[arg(long, default_value_t = zerostab_core::sim::InitPolicy::DEFAULT_SEED)]
    pub seed: u64,
    /// Random start vectors per step count, besides the alternating one.
    #[arg(long, default_value_t = 10)]
    pub random: usize,
    /// Worker threads [default: available parallelism].
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub range: SweepRange,
    /// exp, cos (of 2 pi t) or poly:d=D ((D+1) t^D).
    #[arg(long, default_value = "exp")]
    pub integrand: Integrand,
    #[command(flatten)]
    pub output: OutputArgs,
}
