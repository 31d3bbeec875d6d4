use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "seqfit", version, about = "Fused sequential smoothing solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smooth a univariate sequence (one-column CSV).
    Smooth(SmoothArgs),
    /// Smooth a sequence of vectors (one row per index).
    SmoothMv(SmoothMvArgs),
    /// Fit a k-th order trend to a univariate sequence.
    Trend(TrendArgs),
    /// Compare the iterative solvers with the dual baseline on synthetic data.
    Bench(BenchArgs),
    /// Write a synthetic instance.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalarPenalty {
    Fused,
    Sparse,
    Asymmetric,
    Isotonic,
    Barrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MvPenalty {
    MvSquared,
    MvL2,
    MvLinf,
    DpgL2,
    DpgLinf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkName {
    Squared,
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendName {
    Naive,
    Skiplist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormChoice {
    L2,
    Linf,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Fused,
    Kth,
    Quadratic,
}

/// Options shared by the solving commands.
#[derive(Debug, Args)]
pub struct Common {
    /// Input CSV (headerless).
    pub input: PathBuf,
    /// Output CSV for the fitted sequence.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the dual sequence next to the output.
    #[arg(long)]
    pub emit_dual: bool,
    /// Include the per-iteration surrogate objective in the summary.
    #[arg(long)]
    pub trace: bool,
    /// Leave the wall time out of the summary.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub penalty: ScalarPenalty,
    /// Per-gap weight or bound, the same for every gap.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// One-column CSV with n − 1 per-gap values.
    #[arg(long)]
    pub lambda_file: Option<PathBuf>,
    /// Sparsity weight, the same for every index.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// One-column CSV with n sparsity weights.
    #[arg(long)]
    pub beta_file: Option<PathBuf>,
    /// Weight on increases (may be `inf`).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_hi: Option<f64>,
    /// Weight on decreases, at most zero (may be `-inf`).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_lo: Option<f64>,
    #[arg(long, value_enum, default_value_t = LinkName::Squared)]
    pub link: LinkName,
    #[arg(long, value_enum, default_value_t = BackendName::Skiplist)]
    pub backend: BackendName,
    /// Seed of the skip-list level generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SmoothMvArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub penalty: MvPenalty,
    /// Penalty scale (gap weight for mv-squared).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Per-gap weights for mv-squared.
    #[arg(long)]
    pub lambda_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Step size of the dual baseline.
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct TrendArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Output CSV with one row per method and sparsity level.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated fusion probabilities; empty for no levels.
    #[arg(long, default_value = "0.1,0.3,0.5,0.7")]
    pub sparsity: String,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    /// Instances per sparsity level.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NormChoice::Both)]
    pub norm: NormChoice,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
    /// Directory for per-method `x,y` series.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
    /// Write zero in the wall time column.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = GenKind::Fused)]
    pub kind: GenKind,
    /// Output CSV for the observations.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Probability that a gap is fused (fused) or a difference vanishes (kth).
    #[arg(long, default_value_t = 0.5)]
    pub sparsity: f64,
    #[arg(long, value_enum, default_value_t = NormChoice::L2)]
    pub norm: NormChoice,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Half-width of the uniform noise (quadratic).
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 5)]
    pub shocks: usize,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub shock_value: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the generating dual sequence.
    #[arg(long)]
    pub emit_dual: bool,
}
