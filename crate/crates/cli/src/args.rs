use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use matchsim::{ClassicalBound, Protocol, TiMetric};

#[derive(Debug, Parser)]
#[command(
    name = "matchsim",
    version,
    about = "Hidden/Sampling Matching protocol simulator"
)]
pub struct Cli {
    /// Flat TOML file with default settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (never changes results).
    #[arg(long, global = true, env = "MATCHSIM_THREADS")]
    pub threads: Option<usize>,

    /// Write a JSON run manifest to this path.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical message sizes: best-known protocol and lower bound.
    Bounds(BoundsArgs),
    /// Monte Carlo batch of coherent-state runs.
    Simulate(SimulateArgs),
    /// Closed-form error probabilities over a grid of n and mu.
    Analytic(AnalyticArgs),
    /// Smallest mean photon number reaching the target error.
    OptimizeMu(OptimizeArgs),
    /// Smallest input size with a transmitted-information advantage.
    Threshold(ThresholdArgs),
    /// Transmitted-information curves versus input size (CSV).
    Curve(CurveArgs),
    /// Run-table statistics from a record log or a counts table.
    Table2(Table2Args),
    /// Phase-drift tracking simulation.
    Drift(DriftArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Ideal devices: unit efficiencies and visibility, no dark counts.
    #[arg(long)]
    pub ideal: bool,
    #[arg(long)]
    pub eta_det: Option<f64>,
    #[arg(long)]
    pub eta_channel: Option<f64>,
    /// Interference visibility.
    #[arg(long)]
    pub vis: Option<f64>,
    /// Dark-click probability per detector per slot.
    #[arg(long)]
    pub p_dark: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Input sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Target error probability.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub protocol: Option<Protocol>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Total mean photon number.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Discard abstaining runs instead of guessing.
    #[arg(long)]
    pub post_select: bool,
    /// Add dark clicks to the detector model.
    #[arg(long)]
    pub include_dark: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Statistics as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-run records as line-JSON.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub protocol: Option<Protocol>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub protocol: Option<Protocol>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub protocol: Option<Protocol>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub metric: Option<TiMetric>,
    /// Classical comparator: best_known or lower_bound.
    #[arg(long)]
    pub bound: Option<ClassicalBound>,
    #[arg(long)]
    pub post_select: bool,
    /// Largest input size searched.
    #[arg(long)]
    pub n_cap: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub protocol: Option<Protocol>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub metric: Option<TiMetric>,
    #[arg(long)]
    pub post_select: bool,
    /// Explicit grid (comma separated, even, ascending).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_min", "n_max", "points"])]
    pub n_grid: Vec<usize>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Number of geometrically spaced grid points.
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["records", "counts"]))]
pub struct Table2Args {
    /// Line-JSON record log written by `simulate --records`.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// CSV with columns protocol,n,mu_p,runs,runs_no_click,runs_wrong.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    /// Random-walk step, radians per pulse.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Relative intensity noise on calibration samples.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also average visibilities over this many independent seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Per-block CSV of the first seed.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
