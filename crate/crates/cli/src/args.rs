use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "xyqmc", version, about = "Forward quantum Markov chains for the XY-model on the Cayley tree of order two")]
pub struct Cli {
    /// Log progress to standard error; repeat for more detail.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boundary matrices of the solution family with their consistency residuals.
    SolveBoundary(SolveBoundaryArgs),
    /// Pull-up orbit of a level-homogeneous boundary point, or a periodic-point search.
    Orbit(OrbitArgs),
    /// Run a verification suite and report every residual.
    Verify(VerifyArgs),
    /// Expectation of an observable file in the finite-volume state.
    Expect(ExpectArgs),
    /// Finite-volume free energy against its limit.
    FreeEnergy(FreeEnergyArgs),
}

/// A single `--beta` or an inclusive grid from `--beta-min`, `--beta-max`, `--beta-steps`.
#[derive(Debug, Clone, Args)]
pub struct BetaArgs {
    /// Inverse temperature.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["beta_min", "beta_max", "beta_steps"])]
    pub beta: Option<f64>,

    #[arg(long, allow_negative_numbers = true, requires_all = ["beta_max", "beta_steps"])]
    pub beta_min: Option<f64>,

    #[arg(long, allow_negative_numbers = true, requires_all = ["beta_min", "beta_steps"])]
    pub beta_max: Option<f64>,

    #[arg(long, requires_all = ["beta_min", "beta_max"])]
    pub beta_steps: Option<usize>,
}

impl BetaArgs {
    pub fn grid(&self, default: &[f64]) -> Result<Vec<f64>> {
        let grid = match (self.beta, self.beta_min, self.beta_max, self.beta_steps) {
            (Some(beta), ..) => vec![beta],
            (None, Some(lo), Some(hi), Some(steps)) => {
                if steps == 0 {
                    return Err(CliError::Usage("--beta-steps must be at least 1".into()));
                }
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(CliError::Usage(format!("--beta-min {lo} exceeds --beta-max {hi}")));
                }
                if steps == 1 {
                    vec![lo]
                } else {
                    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
                }
            }
            _ => default.to_vec(),
        };
        for &beta in &grid {
            check_positive("beta", beta)?;
        }
        Ok(grid)
    }
}

pub fn check_positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive and finite, got {value}")))
    }
}

/// `auto` (`α₀ = 1/cosh⁴β`) or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Auto,
    Value(f64),
}

impl Alpha {
    pub fn resolve(self, beta: f64) -> Result<f64> {
        match self {
            Alpha::Auto => Ok(xyqmc::boundary::alpha0(beta)),
            Alpha::Value(a) => check_positive("alpha", a),
        }
    }
}

impl FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Alpha::Auto);
        }
        s.parse::<f64>()
            .map(Alpha::Value)
            .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Dense,
    Transfer,
    /// Dense when the volume fits, transfer otherwise.
    Auto,
    /// Dense and transfer side by side with their gap.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvaluationChoice {
    Auto,
    Reduced,
    Padded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Model,
    Boundary,
    Compat,
    Uniqueness,
    Appendix,
}

#[derive(Debug, Args)]
pub struct SolveBoundaryArgs {
    #[command(flatten)]
    pub beta: BetaArgs,

    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub alpha: Alpha,

    /// Deepest level to report.
    #[arg(long = "n", visible_alias = "levels", default_value_t = 4)]
    pub n: usize,

    #[arg(long, default_value_t = 1e-12, allow_negative_numbers = true)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub out: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,

    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub x0: f64,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y0: f64,

    #[arg(long, default_value_t = 200)]
    pub max_steps: usize,

    /// Search sampled starts for periodic returns instead of following one orbit.
    #[arg(long)]
    pub periodic: bool,

    /// Largest period looked for by `--periodic`.
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,

    /// Number of starts sampled by `--periodic`.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum)]
    pub out: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,

    #[command(flatten)]
    pub beta: BetaArgs,

    /// Boundary parameter; suites that scan α ignore it.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<Alpha>,

    #[arg(long = "n")]
    pub n: Option<usize>,

    /// Replace every per-check tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub out: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ExpectArgs {
    /// Observable file in JSON; `-` reads standard input.
    pub observable: PathBuf,

    #[command(flatten)]
    pub beta: BetaArgs,

    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub alpha: Alpha,

    #[arg(long = "n", default_value_t = 1)]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    pub engine: EngineChoice,

    #[arg(long, value_enum, default_value_t = EvaluationChoice::Auto)]
    pub evaluation: EvaluationChoice,

    /// Let the dense engine fall back to the matrix-free trace on `Λ_{n+1}` (slow).
    #[arg(long)]
    pub matrix_free: bool,

    /// Largest accepted dense/transfer gap with `--engine both`.
    #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub out: OutputFormat,
}

#[derive(Debug, Args)]
pub struct FreeEnergyArgs {
    #[command(flatten)]
    pub beta: BetaArgs,

    #[arg(long, default_value = "auto", allow_negative_numbers = true)]
    pub alpha: Alpha,

    #[arg(long = "n", default_value_t = 20)]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub out: OutputFormat,
}
