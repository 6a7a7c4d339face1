use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpgdp::{Direction, MechanismKind, Representation};

#[derive(Debug, Parser)]
#[command(name = "dpgdp", version, about = "Numerical privacy accounting summarized as μ-GDP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compose a run and report μ, regret and (ε, δ) queries as JSON.
    Account(AccountArgs),
    /// Convert an (ε, δ) guarantee into the μ whose GDP profile meets it.
    Convert(ConvertArgs),
    /// Write the composed trade-off curve next to its fitted GDP curve as CSV.
    Tradeoff(TradeoffArgs),
    /// Regret, in percent, of summarizing a run with each privacy representation.
    Compare(CompareArgs),
    /// Fit μ and regret over a grid of DP-SGD parameters.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MechanismArg {
    Gaussian,
    SubsampledGaussian,
    Laplace,
    RandomizedResponse,
    AdpPoint,
}

impl From<MechanismArg> for MechanismKind {
    fn from(m: MechanismArg) -> Self {
        match m {
            MechanismArg::Gaussian => MechanismKind::Gaussian,
            MechanismArg::SubsampledGaussian => MechanismKind::SubsampledGaussian,
            MechanismArg::Laplace => MechanismKind::Laplace,
            MechanismArg::RandomizedResponse => MechanismKind::RandomizedResponse,
            MechanismArg::AdpPoint => MechanismKind::AdpPoint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    Add,
    Remove,
    PessimisticBoth,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Add => Direction::Add,
            DirectionArg::Remove => Direction::Remove,
            DirectionArg::PessimisticBoth => Direction::PessimisticBoth,
        }
    }
}

/// Describes the run. Flags override the matching fields of `--config`.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base mechanism. Inferred from the other flags when omitted.
    #[arg(long, value_enum)]
    pub mechanism: Option<MechanismArg>,
    /// Gaussian noise multiplier σ.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Gaussian privacy parameter μ (alternative to σ).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Poisson subsampling rate q.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Laplace scale b.
    #[arg(long)]
    pub scale: Option<f64>,
    /// ε of a randomized-response or (ε, δ) point mechanism.
    #[arg(long)]
    pub mech_epsilon: Option<f64>,
    /// δ of an (ε, δ) point mechanism.
    #[arg(long)]
    pub mech_delta: Option<f64>,
    /// Number of compositions T.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Neighbouring relation.
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Loss grid step. Falls back to DPGDP_GRID_STEP, then 1e-4.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AccountArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Report ε at this δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Report δ at this ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, required_unless_present = "table", requires = "delta")]
    pub epsilon: Option<f64>,
    #[arg(long, required_unless_present = "table", requires = "epsilon")]
    pub delta: Option<f64>,
    /// Print μ for ε ∈ {0.1, 0.5, 1, 2, 4, 6, 8, 10} and δ ∈ {1e-5, 1e-6, 1e-9}.
    #[arg(long, conflicts_with_all = ["epsilon", "delta"])]
    pub table: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Representations to compare.
    #[arg(long, value_delimiter = ',', default_value = "pure,adp,zcdp,gdp,rdp,profile")]
    pub representations: Vec<Representation>,
    /// δ at which the (ε, δ) representation is taken.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Noise multipliers, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma: Vec<f64>,
    /// Sampling rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sample_rate: Vec<f64>,
    /// Composition counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub steps: Vec<u64>,
    /// Regret threshold checked over cells with σ ≥ 2 and T ≥ 400.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
