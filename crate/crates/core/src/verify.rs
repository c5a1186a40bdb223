//! Empirical check of strong clustering for every frequent long block: the
//! normalized waiting time until the next occurrence must be at most
//! `epsilon` with probability below `epsilon^2`.
//!
//! The waiting time is measured from every origin of the window (the entry
//! law). The return-gap value is reported alongside for every block; it is not
//! part of the pass criterion, since inside a burst of `v` occurrences about
//! `(v - 1) / v` of the return gaps are short by construction.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::BlockSweep;
use crate::error::{Error, Result};
use crate::perturb::{PerturbationPlan, SectorLayout};
use crate::recurrence::{entry_cdf_at, return_cdf_at};
use crate::symbolic::{format_symbols, OccurrenceList, SymbolSequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub n_lo: usize,
    pub n_hi: usize,
    pub min_count: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScore {
    pub length: usize,
    pub block: String,
    pub count: usize,
    /// Fraction of origins whose normalized waiting time is at most epsilon.
    pub entry_value: f64,
    /// Fraction of normalized return gaps at most epsilon.
    pub return_value: f64,
    /// Occurrences per visited sector, when a plan is given.
    pub sector_visits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: VerifyParams,
    pub plan: Option<PerturbationPlan>,
    pub window: [usize; 2],
    pub lengths_checked: usize,
    pub blocks_checked: usize,
    pub threshold: f64,
    pub worst_block: BlockScore,
    pub worst_value: f64,
    /// Block with the largest return-gap value, for diagnostics.
    pub worst_return_block: BlockScore,
    pub min_sector_visits: Option<f64>,
    pub median_sector_visits: Option<f64>,
    pub pass: bool,
}

fn score(
    seq: &SymbolSequence,
    window: &std::ops::Range<usize>,
    layout: Option<&SectorLayout>,
    n: usize,
    positions: &[usize],
    epsilon: f64,
) -> Result<BlockScore> {
    let occ = OccurrenceList::new(positions.to_vec(), window.len(), n)?;
    let sector_visits = layout.map(|layout| {
        let visited: HashSet<(usize, usize)> = positions
            .iter()
            .filter_map(|&p| layout.locate(window.start + p))
            .collect();
        positions.len() as f64 / visited.len().max(1) as f64
    });
    let p = window.start + positions[0];
    Ok(BlockScore {
        length: n,
        block: format_symbols(seq.alphabet(), &seq.as_slice()[p..p + n]),
        count: positions.len(),
        entry_value: entry_cdf_at(&occ, epsilon)?,
        return_value: return_cdf_at(&occ, epsilon)?,
        sector_visits,
    })
}

/// Scores every block with length in `[n_lo, n_hi]` occurring at least
/// `min_count` times inside the plan's active window (the whole sequence
/// without a plan); passes when the worst entry value is below `epsilon^2`.
pub fn verify_theorem(
    seq: &SymbolSequence,
    plan: Option<&PerturbationPlan>,
    params: &VerifyParams,
) -> Result<VerificationReport> {
    let VerifyParams {
        n_lo,
        n_hi,
        min_count,
        epsilon,
    } = *params;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1), got {epsilon}"
        )));
    }
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::InvalidParameter(format!("empty length range [{n_lo}, {n_hi}]")));
    }
    if n_hi > n_lo.saturating_mul(n_lo) {
        return Err(Error::InvalidParameter(format!(
            "N_hi = {n_hi} exceeds N^2 = {}",
            n_lo * n_lo
        )));
    }
    if min_count < 2 {
        return Err(Error::InvalidParameter("min_count must be at least 2".into()));
    }
    let layout = match plan {
        Some(plan) => {
            if n_lo < plan.n {
                return Err(Error::InvalidParameter(format!(
                    "N = {n_lo} is below the plan's threshold {}",
                    plan.n
                )));
            }
            Some(SectorLayout::build(seq.len(), plan)?)
        }
        None => None,
    };
    let window = layout.as_ref().map_or(0..seq.len(), |l| l.active());
    let sub = seq.window(window.clone())?;
    if n_hi > sub.len() {
        return Err(Error::BlockTooLong {
            block: n_hi,
            sequence: sub.len(),
        });
    }

    let mut scores: Vec<BlockScore> = Vec::new();
    let mut lengths = 0;
    let mut sweep = BlockSweep::new(&sub, n_lo, min_count)?;
    loop {
        let n = sweep.block_length();
        lengths += 1;
        let batch: Vec<BlockScore> = sweep
            .groups()
            .par_iter()
            .map(|g| score(seq, &window, layout.as_ref(), n, g, epsilon))
            .collect::<Result<_>>()?;
        scores.extend(batch);
        if n == n_hi || sweep.groups().is_empty() || !sweep.advance() {
            break;
        }
    }
    if scores.is_empty() {
        return Err(Error::NoQualifyingBlocks {
            lo: n_lo,
            hi: n_hi,
            min_count,
        });
    }
    let by = |f: fn(&BlockScore) -> f64| {
        scores
            .iter()
            .max_by(|a, b| f(a).total_cmp(&f(b)))
            .cloned()
            .expect("nonempty")
    };
    let worst_block = by(|s| s.entry_value);
    let worst_return_block = by(|s| s.return_value);
    let mut visits: Vec<f64> = scores.iter().filter_map(|s| s.sector_visits).collect();
    visits.sort_by(f64::total_cmp);
    let threshold = epsilon * epsilon;
    Ok(VerificationReport {
        params: params.clone(),
        plan: plan.cloned(),
        window: [window.start, window.end],
        lengths_checked: lengths,
        blocks_checked: scores.len(),
        threshold,
        worst_value: worst_block.entry_value,
        pass: worst_block.entry_value < threshold,
        worst_block,
        worst_return_block,
        min_sector_visits: visits.first().copied(),
        median_sector_visits: visits.get(visits.len() / 2).copied(),
    })
}
