//! Recurrence statistics for rare events in stationary symbolic processes.
//!
//! Blocks (cylinder events) of a finite sample are scanned for occurrences,
//! their return and entry times are Kac-normalized, and the resulting laws
//! are compared with the exponential law to detect clustering. A marker-based
//! perturbation builds sequences where every long block occurs in bursts,
//! and a verifier checks that property empirically.

pub mod blocks;
pub mod error;
pub mod ingest;
pub mod laws;
pub mod marker;
pub mod perturb;
pub mod process;
pub mod record;
pub mod recurrence;
pub mod seqio;
pub mod symbolic;
pub mod verify;

pub use blocks::{enumerate_blocks, BlockSweep};
pub use error::{Error, Result};
pub use ingest::{binarize, burst_report, parse_events, BurstReport, EventSeries, ParseOptions};
pub use laws::{check_entropy_bound, classify, exp_law, star_residual, star_transform, ClusterVerdict, Recurrence};
pub use marker::{build_markers, sparse_cuts, subdivide_gap, MarkerSet};
pub use perturb::{make_w_family, perturb, PerturbOutcome, PerturbationPlan, PlanReport, SectorLayout, WFamily};
pub use process::{exact_block_probability, generate, ProcessKind, ProcessSpec};
pub use record::{block_statistics, StatsOptions, StatsRecord};
pub use recurrence::{
    cluster_stats, ecdf, entry_ecdf, entry_times, kac_statistic, ks_distance, return_ecdf, return_gaps, CdfKind,
    ClusterStats, EmpiricalCdf, EntryTimes, GapList,
};
pub use seqio::{read_sequence, write_sequence};
pub use symbolic::{
    empirical_measure, hamming_fraction, scan_occurrences, Alphabet, Block, OccurrenceList, SymbolSequence,
};
pub use verify::{verify_theorem, BlockScore, VerificationReport, VerifyParams};
