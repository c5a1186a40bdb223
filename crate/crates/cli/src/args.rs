use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "serieslaw",
    version,
    about = "Recurrence and clustering statistics for symbolic sequences"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Seed overriding the one in the spec or plan.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output path; stdout when absent (`gen` and `perturb` write the sequence here).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a sequence from a process spec (TOML).
    Gen(GenArgs),
    /// Recurrence statistics and clustering verdicts for blocks.
    Stats(StatsArgs),
    /// Brand sectors with signal blocks so long blocks occur in bursts.
    Perturb(PerturbArgs),
    /// Check strong clustering of every frequent long block.
    Verify(VerifyArgs),
    /// Clustering report for a file of event timestamps.
    Ingest(IngestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Stats(_) => "stats",
            Command::Perturb(_) => "perturb",
            Command::Verify(_) => "verify",
            Command::Ingest(_) => "ingest",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub spec: PathBuf,

    #[arg(long)]
    pub length: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    /// Sequence file (`.sym` raw or text).
    #[arg(long)]
    pub input: PathBuf,

    /// A single block, e.g. `010`.
    #[arg(long, conflicts_with = "all_length", required_unless_present = "all_length")]
    pub block: Option<String>,

    /// Every block of this length with at least `--min-count` occurrences.
    #[arg(long)]
    pub all_length: Option<usize>,

    #[arg(long, default_value_t = 2)]
    pub min_count: usize,

    /// Comma-separated grid of normalized times.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,

    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,

    /// Statistical half-width of the neutral band (derived from the sample size by default).
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    /// Maximum ECDF points per record.
    #[arg(long, default_value_t = 512)]
    pub max_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PerturbArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,

    /// Budget on the fraction of changed symbols.
    #[arg(long, default_value_t = 0.11)]
    pub delta: f64,

    /// Signal block length (odd).
    #[arg(long = "L", default_value_t = 11)]
    pub l: usize,

    /// Marker gap; the smallest value allowed by `L` and `delta` by default.
    #[arg(long = "r")]
    pub r: Option<usize>,

    /// Sector length.
    #[arg(long = "M", default_value_t = 40_000)]
    pub m: usize,

    /// Verification threshold; `2r + 2` by default.
    #[arg(long = "N")]
    pub n: Option<usize>,

    /// Where to write the plan report; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Plan report written by `perturb`; restricts checking to its active window.
    #[arg(long)]
    pub plan: Option<PathBuf>,

    /// Shortest block length; the plan's threshold by default.
    #[arg(long = "N")]
    pub n: Option<usize>,

    /// Longest block length; `N + 50` by default, clamped to `N^2`.
    #[arg(long = "N-hi")]
    pub n_hi: Option<usize>,

    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 200)]
    pub min_count: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    /// One timestamp per line, or CSV with `--column`.
    #[arg(long)]
    pub input: PathBuf,

    /// Zero-based CSV column holding the timestamps.
    #[arg(long)]
    pub column: Option<usize>,

    /// Skip a header line.
    #[arg(long)]
    pub header: bool,

    /// Bin width; a quarter of the median inter-event gap by default.
    #[arg(long)]
    pub bin_width: Option<f64>,

    /// Also report verdicts over a range of bin widths.
    #[arg(long)]
    pub sweep: bool,

    #[arg(long, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,

    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,

    #[arg(long)]
    pub tol: Option<f64>,
}
