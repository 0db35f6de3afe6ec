//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stabapprox::{ConstraintKind, ModelKind, StateDomain};

#[derive(Debug, Parser)]
#[command(name = "stabapprox", version, about = "Stabilizer-simulable approximations of one-qubit error channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate one target channel.
    Approx(ApproxArgs),
    /// Approximate a target over a grid of its parameter.
    Sweep(SweepArgs),
    /// Approximate a batch of random channels and summarize the distances.
    Random(RandomArgs),
    /// Images of a great circle of the Bloch sphere (y = 0 plane) under a
    /// target and its best approximation.
    BlochSection(BlochArgs),
    /// Check a process matrix stored as JSON for complete positivity and
    /// trace preservation.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetKind {
    Adc,
    Pol,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Pc,
    Pmc,
    Cc,
    Cmc,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Avg,
    Worst,
}

impl From<ConstraintArg> for ConstraintKind {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::Avg => ConstraintKind::AverageFidelity,
            ConstraintArg::Worst => ConstraintKind::WorstFidelity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatesArg {
    Pure,
    Mixed,
}

impl From<StatesArg> for StateDomain {
    fn from(s: StatesArg) -> Self {
        match s {
            StatesArg::Pure => StateDomain::Pure,
            StatesArg::Mixed => StateDomain::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutFormat {
    #[default]
    Csv,
    Json,
}

/// Expands `all` and removes duplicates, keeping first occurrences.
pub fn expand_models(args: &[ModelArg]) -> Vec<ModelKind> {
    let mut out = Vec::new();
    for a in args {
        let add: &[ModelKind] = match a {
            ModelArg::Pc => &[ModelKind::Pc],
            ModelArg::Pmc => &[ModelKind::Pmc],
            ModelArg::Cc => &[ModelKind::Cc],
            ModelArg::Cmc => &[ModelKind::Cmc],
            ModelArg::All => &ModelKind::ALL,
        };
        for m in add {
            if !out.contains(m) {
                out.push(*m);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    #[arg(long, value_enum)]
    pub target: TargetKind,
    /// Damping strength of the amplitude-damping target.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Polarization axis angle from X in the X-Y plane.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Error probability of the polarization target.
    #[arg(long)]
    pub p: Option<f64>,
    /// JSON file with the 16 process-matrix entries (for `--target file`).
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Read angles in degrees instead of radians.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Comma-separated models, or `all`.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    pub model: Vec<ModelArg>,
    #[arg(long, value_enum, default_value = "avg")]
    pub constraint: ConstraintArg,
    /// States over which worst-case fidelities are minimized.
    #[arg(long, value_enum, default_value = "pure")]
    pub states: StatesArg,
}

#[derive(Debug, Clone, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// `adc` sweeps gamma, `pol` sweeps phi at fixed `--p`.
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Grid start (default 0).
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    /// Grid end (default 1 for `adc`, π/2 for `pol`).
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: OutFormat,
}

#[derive(Debug, Clone, Args)]
pub struct RandomArgs {
    #[arg(long, default_value_t = 2000)]
    pub count: usize,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub out: OutFormat,
    /// Where to write the JSON summary for CSV output (default: standard error).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BlochArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, value_enum, default_value = "pmc")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "avg")]
    pub constraint: ConstraintArg,
    #[arg(long, value_enum, default_value = "pure")]
    pub states: StatesArg,
    /// Points on the circle, at angles 2πk/points.
    #[arg(long, default_value_t = 64)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub file: PathBuf,
}
