use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pathwise::solver::{
    DEFAULT_LAMBDA_MIN_RATIO, DEFAULT_MAX_INNER_SWEEPS, DEFAULT_MAX_MIDDLE_ROUNDS, DEFAULT_MAX_NEWTON_STEPS,
    DEFAULT_NLAMBDA, DEFAULT_PREC,
};
use pathwise::{Family, GaussianUpdate, RegularizerKind};

#[derive(Debug, Parser)]
#[command(name = "pathwise", version, about = "Sparse regularization paths by pathwise coordinate optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regularization path to a CSV file.
    Fit(FitArgs),
    /// Turn a fitted path into a wide plotting table and an optional SVG.
    Plot(PlotArgs),
    /// Time path fits on synthetic data, with and without screening.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    L1,
    Mcp,
    Scad,
}

impl From<Method> for RegularizerKind {
    fn from(m: Method) -> Self {
        match m {
            Method::L1 => RegularizerKind::L1,
            Method::Mcp => RegularizerKind::Mcp,
            Method::Scad => RegularizerKind::Scad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Binomial,
    Poisson,
    /// Scaled (square-root) lasso: jointly estimates the noise level.
    Sqrtlasso,
}

impl FamilyArg {
    pub fn name(self) -> &'static str {
        match self {
            FamilyArg::Gaussian => "gaussian",
            FamilyArg::Binomial => "binomial",
            FamilyArg::Poisson => "poisson",
            FamilyArg::Sqrtlasso => "sqrtlasso",
        }
    }
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Binomial => Family::Binomial,
            FamilyArg::Poisson => Family::Poisson,
            FamilyArg::Sqrtlasso => Family::ScaledGaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpdateArg {
    Naive,
    Covariance,
}

impl From<UpdateArg> for GaussianUpdate {
    fn from(u: UpdateArg) -> Self {
        match u {
            UpdateArg::Naive => GaussianUpdate::Naive,
            UpdateArg::Covariance => GaussianUpdate::Covariance,
        }
    }
}

/// Penalty and solver controls shared by `fit` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Method::L1)]
    pub method: Method,

    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    pub family: FamilyArg,

    /// Concavity parameter for mcp (default 3.0) or scad (default 3.7).
    #[arg(long)]
    pub gamma: Option<f64>,

    #[arg(long, default_value_t = DEFAULT_NLAMBDA)]
    pub nlambda: usize,

    #[arg(long = "lambda-min-ratio", alias = "lambda_min_ratio", default_value_t = DEFAULT_LAMBDA_MIN_RATIO)]
    pub lambda_min_ratio: f64,

    #[arg(long, default_value_t = DEFAULT_PREC)]
    pub prec: f64,

    #[arg(long = "max-inner-sweeps", alias = "max_inner_sweeps", default_value_t = DEFAULT_MAX_INNER_SWEEPS)]
    pub max_inner_sweeps: usize,

    #[arg(long = "max-middle-rounds", alias = "max_middle_rounds", default_value_t = DEFAULT_MAX_MIDDLE_ROUNDS)]
    pub max_middle_rounds: usize,

    #[arg(long = "max-newton-steps", alias = "max_newton_steps", default_value_t = DEFAULT_MAX_NEWTON_STEPS)]
    pub max_newton_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Input CSV: one response column plus numeric feature columns.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Path table (CSV). The diagnostics sidecar is written next to it with
    /// a `.json` extension.
    #[arg(long, short)]
    pub output: PathBuf,

    /// Response column: 0-based index, or a header name.
    #[arg(long, default_value = "0")]
    pub response: String,

    /// The first CSV row holds column names.
    #[arg(long)]
    pub header: bool,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Gaussian update rule; only valid with `--family gaussian`.
    #[arg(long = "type-gaussian", alias = "type_gaussian", value_enum)]
    pub type_gaussian: Option<UpdateArg>,

    /// Exit with status 3 if any path point fails to converge.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Path table written by `fit`.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Diagnostics sidecar; defaults to the input path with a `.json` extension.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,

    /// Wide plotting table (CSV).
    #[arg(long, short)]
    pub output: PathBuf,

    /// Also render the coefficient trajectories as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,

    #[arg(long, default_value_t = 5000)]
    pub d: usize,

    /// Nonzero coefficients in the generating model.
    #[arg(long, default_value_t = 10)]
    pub sparsity: usize,

    /// AR(1) correlation between neighbouring features.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,

    #[arg(long = "noise-sd", alias = "noise_sd", default_value_t = 1.0)]
    pub noise_sd: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,

    #[command(flatten)]
    pub solver: SolverArgs,

    /// Skip the unscreened baseline.
    #[arg(long = "no-baseline", alias = "no_baseline")]
    pub no_baseline: bool,

    /// Refuse problems with more than this many design cells (n * d).
    #[arg(long = "max-cells", alias = "max_cells", default_value_t = pathwise::harness::DEFAULT_MAX_CELLS)]
    pub max_cells: usize,

    /// Write the full report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::{CommandFactory, Parser};

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn both_ratio_spellings_parse() {
        for flag in ["--lambda-min-ratio", "--lambda_min_ratio"] {
            let cli = Cli::try_parse_from(["pathwise", "fit", "-i", "a", "-o", "b", flag, "0.2"]).unwrap();
            let Command::Fit(args) = cli.command else { panic!("expected fit") };
            assert_eq!(args.solver.lambda_min_ratio, 0.2);
        }
    }
}
