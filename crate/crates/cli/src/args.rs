use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gepi_core::Execution;

#[derive(Debug, Parser)]
#[command(name = "gepi", version, about = "Minimum entropy of sums on finite abelian groups")]
pub struct Cli {
    /// Unit for every entropy and rate, on input and output.
    #[arg(long, value_enum, global = true, default_value_t = Unit::Nats)]
    pub unit: Unit,

    /// Output format for tabular results.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write results here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for grid sweeps and Monte Carlo suites.
    #[arg(long, global = true, env = "GEPI_THREADS")]
    pub threads: Option<usize>,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    /// Nats per unit.
    pub fn scale(self) -> f64 {
        match self {
            Unit::Nats => 1.0,
            Unit::Bits => std::f64::consts::LN_2,
        }
    }

    pub fn to_nats(self, v: f64) -> f64 {
        v * self.scale()
    }

    pub fn nats_in_unit(self, v: f64) -> f64 {
        v / self.scale()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form minimum entropy of a sum on a 2-group.
    Eval(EvalArgs),
    /// Numeric minimum on a grid, next to the closed form when one exists.
    Oracle(OracleArgs),
    /// Rate-region boundary for an additive-noise channel or source.
    Region(RegionArgs),
    /// Randomized and exact consistency checks; exit code 1 on a violation.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Group descriptor such as z4 or z2xz4.
    #[arg(long)]
    pub group: String,
    #[arg(long, requires = "y", conflicts_with = "xs", allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long, requires = "x", allow_negative_numbers = true)]
    pub y: Option<f64>,
    /// Comma-separated summand entropies.
    #[arg(long, value_delimiter = ',', required_unless_present = "x", allow_negative_numbers = true)]
    pub xs: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random restarts per point.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 400)]
    pub iterations: usize,
    /// Skip the extremal and profile starts; random and mesh starts only.
    #[arg(long)]
    pub random_starts_only: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub group: String,
    /// Grid points per axis on `[0, ln |G|]`.
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionKind {
    Broadcast,
    BroadcastGaussian,
    Helper,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long, value_enum)]
    pub kind: RegionKind,
    /// JSON file with the group and noise distributions.
    #[arg(long)]
    pub spec: PathBuf,
    /// Evenly spaced values of the auxiliary parameter on `[0, 1/2]`.
    #[arg(long, default_value_t = 201)]
    pub alpha_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    MglScalar,
    MglVector,
    Convexity,
    Lemmas,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub kind: CheckKind,
    /// Groups to sample from; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub group: Vec<String>,
    /// Monte Carlo trials (default 10000 scalar, 1000 vector).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Block length for the vector check.
    #[arg(long, default_value_t = 2)]
    pub block_length: usize,
    /// Scan resolution (intervals per axis) for the convexity check.
    #[arg(long, default_value_t = 40)]
    pub resolution: usize,
    /// Number of fixed values for the convexity check.
    #[arg(long, default_value_t = 9)]
    pub fixed_points: usize,
    /// Convexity-check tolerance on second differences.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Grid size for the auxiliary-inequality check.
    #[arg(long, default_value_t = 10_000)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 400)]
    pub iterations: usize,
}
