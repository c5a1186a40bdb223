//! The per-block statistics record shared by `stats` and `ingest`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::{
    check_entropy_bound, classify, default_tolerance, exp_law, star_residual, ClusterVerdict, EntropyBoundReport,
    DEFAULT_ALPHA, DEFAULT_EPSILON, DEFAULT_T_GRID,
};
use crate::recurrence::{
    cluster_stats, entry_ecdf, kac_statistic, ks_distance, return_ecdf, return_gaps, ClusterStats,
};
use crate::symbolic::OccurrenceList;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsOptions {
    pub t_grid: Vec<f64>,
    pub epsilon: f64,
    /// Classification band; derived from the sample size when absent.
    pub tol: Option<f64>,
    pub alpha: f64,
    /// Upper end of the range where the integral relation is checked.
    pub star_t_max: f64,
    /// ECDFs are thinned to at most this many points in the record.
    pub max_points: usize,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            t_grid: DEFAULT_T_GRID.to_vec(),
            epsilon: DEFAULT_EPSILON,
            tol: None,
            alpha: DEFAULT_ALPHA,
            star_t_max: 4.0,
            max_points: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub block: String,
    pub block_length: usize,
    pub sequence_length: usize,
    pub occurrences: usize,
    pub mu_hat: f64,
    pub kac: f64,
    pub censored: usize,
    pub return_ecdf: Vec<[f64; 2]>,
    pub entry_ecdf: Vec<[f64; 2]>,
    pub ks_return: f64,
    pub ks_entry: f64,
    pub star_residual: f64,
    pub entropy_bound: EntropyBoundReport,
    pub cluster: Vec<ClusterStats>,
    /// `F~(epsilon)`, the fraction of short return gaps.
    pub return_at_epsilon: f64,
    pub classification: ClusterVerdict,
}

/// Recurrence statistics and the clustering verdict for one block.
pub fn block_statistics(block: &str, occ: &OccurrenceList, opts: &StatsOptions) -> Result<StatsRecord> {
    let gaps = return_gaps(occ)?;
    let ret = return_ecdf(&gaps)?;
    let (entry, censored) = entry_ecdf(occ)?;
    let tol = match opts.tol {
        Some(t) => t,
        None => default_tolerance(gaps.gaps.len() as u64, opts.alpha),
    };
    let exp = |t: f64| exp_law(t.max(0.0)).expect("clamped to nonnegative");
    let mut cluster = Vec::new();
    for &t in &opts.t_grid {
        if t <= 0.0 {
            continue;
        }
        match cluster_stats(occ, t) {
            Ok(c) => cluster.push(c),
            Err(Error::WindowTooLarge { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(StatsRecord {
        block: block.to_string(),
        block_length: occ.block_length(),
        sequence_length: occ.sequence_length(),
        occurrences: occ.len(),
        mu_hat: gaps.mu_hat,
        kac: kac_statistic(&gaps),
        censored,
        return_ecdf: ret.thinned_points(opts.max_points),
        entry_ecdf: entry.thinned_points(opts.max_points),
        ks_return: ks_distance(&ret, exp),
        ks_entry: ks_distance(&entry, exp),
        star_residual: star_residual(&entry, &ret, opts.star_t_max),
        entropy_bound: check_entropy_bound(&entry, tol),
        cluster,
        return_at_epsilon: ret.eval(opts.epsilon),
        classification: classify(&entry, &opts.t_grid, tol, opts.epsilon)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::Recurrence;
    use crate::symbolic::{scan_occurrences, Block, SymbolSequence};

    #[test]
    fn periodic_record() {
        let s = SymbolSequence::binary(&"01".repeat(20_000)).unwrap();
        let occ = scan_occurrences(&s, &Block::binary("01").unwrap()).unwrap();
        let rec = block_statistics("01", &occ, &StatsOptions::default()).unwrap();
        assert_eq!(rec.occurrences, 20_000);
        assert!((rec.kac - 1.0).abs() < 1e-3);
        assert!(rec.star_residual < 1e-3);
        assert_eq!(rec.classification.verdict, Recurrence::Repelling);
        assert_eq!(rec.classification.margins.len(), DEFAULT_T_GRID.len());
        let json = serde_json::to_string(&rec).unwrap();
        let back: StatsRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn oversized_windows_are_skipped() {
        let s = SymbolSequence::binary("0100000001000000010").unwrap();
        let occ = scan_occurrences(&s, &Block::binary("1").unwrap()).unwrap();
        let opts = StatsOptions {
            t_grid: vec![0.5, 1.0, 100.0],
            ..StatsOptions::default()
        };
        let rec = block_statistics("1", &occ, &opts).unwrap();
        assert_eq!(rec.cluster.len(), 2);
    }
}
