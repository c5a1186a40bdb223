//! Sector perturbation: brands every sector of a marker tower with its own
//! signal block so that long blocks of the recoded sequence occur in tight
//! bursts separated by long silences.
//!
//! Signal blocks have the shape `1 w 1 0^m` with `|w| = m - 1`, length
//! `L = 2m + 1`, and `w` not all zeros. No two of them (equal or not) can
//! occur overlapping: at a shift `s <= m` the trailing `1` of one lands in the
//! zero tail of the other, and at a shift `s > m` the leading `1` of the
//! later one lands in that tail.

use std::collections::HashMap;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marker::{build_markers, MarkerSet};
use crate::symbolic::{format_symbols, hamming_fraction, Alphabet, SymbolSequence};

/// Inner words are enumerated exhaustively up to this length, sampled above it.
const ENUMERATE_INNER_MAX: usize = 16;

fn compose(inner: &[u8]) -> Vec<u8> {
    let m = inner.len() + 1;
    let mut w = Vec::with_capacity(2 * m + 1);
    w.push(1);
    w.extend_from_slice(inner);
    w.push(1);
    w.resize(2 * m + 1, 0);
    w
}

/// Whether `data[i..i + l]` has the signal shape; returns the inner word.
fn signal_at(data: &[u8], i: usize, l: usize) -> Option<&[u8]> {
    let m = (l - 1) / 2;
    let w = data.get(i..i + l)?;
    (w[0] == 1 && w[m] == 1 && w[m + 1..].iter().all(|&s| s == 0)).then(|| &w[1..m])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WFamily {
    block_length: usize,
    blocks: Vec<Vec<u8>>,
}

impl WFamily {
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<u8>] {
        &self.blocks
    }

    pub fn get(&self, k: usize) -> &[u8] {
        &self.blocks[k]
    }

    pub fn inner(&self, k: usize) -> &[u8] {
        let m = (self.block_length - 1) / 2;
        &self.blocks[k][1..m]
    }

    fn index(&self) -> HashMap<&[u8], usize> {
        (0..self.len()).map(|k| (self.inner(k), k)).collect()
    }

    /// Pairs `(j, k, s)` with `W_j` shifted by `0 < s < L` agreeing with `W_k`
    /// on their overlap. Always empty for a well-formed family.
    pub fn overlaps(&self) -> Vec<(usize, usize, usize)> {
        let l = self.block_length;
        let mut found = Vec::new();
        for (j, a) in self.blocks.iter().enumerate() {
            for (k, b) in self.blocks.iter().enumerate() {
                for s in 1..l {
                    if a[s..] == b[..l - s] {
                        found.push((j, k, s));
                    }
                }
            }
        }
        found
    }

    pub fn labels(&self) -> Vec<String> {
        self.blocks
            .iter()
            .map(|b| format_symbols(Alphabet::BINARY, b))
            .collect()
    }
}

/// Number of admissible inner words for block length `l`, saturating.
pub fn family_capacity(l: usize) -> u64 {
    let inner = (l.saturating_sub(1) / 2).saturating_sub(1);
    if inner >= 64 {
        u64::MAX
    } else {
        (1u64 << inner) - 1
    }
}

fn check_length(l: usize) -> Result<()> {
    if l < 5 || l.is_multiple_of(2) {
        return Err(Error::InvalidPlan(format!(
            "signal block length L must be odd and at least 5, got {l}"
        )));
    }
    Ok(())
}

/// Occurrence counts of every signal-shaped window of `data`, by inner word.
fn signal_counts(data: &[u8], l: usize) -> HashMap<Vec<u8>, u64> {
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    for i in 0..(data.len() + 1).saturating_sub(l) {
        if let Some(inner) = signal_at(data, i, l) {
            *counts.entry(inner.to_vec()).or_default() += 1;
        }
    }
    counts
}

/// Picks `k` signal blocks of length `l`. With a base sequence, blocks that
/// occur least often in it come first; ties are broken by a seeded shuffle.
pub fn make_w_family(k: usize, l: usize, seed: u64, base: Option<&SymbolSequence>) -> Result<WFamily> {
    check_length(l)?;
    let capacity = family_capacity(l);
    if k as u64 > capacity || k == 0 {
        return Err(Error::FamilyTooLarge { k, l, max: capacity });
    }
    let inner_len = (l - 1) / 2 - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<u8>> = if inner_len <= ENUMERATE_INNER_MAX {
        (1..=capacity)
            .map(|v| (0..inner_len).rev().map(|bit| (v >> bit & 1) as u8).collect())
            .collect()
    } else {
        let want = (4 * k).max(k + 64);
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(want);
        while out.len() < want {
            let w: Vec<u8> = (0..inner_len).map(|_| rng.random_range(0..2u8)).collect();
            if w.contains(&1) && seen.insert(w.clone()) {
                out.push(w);
            }
        }
        out
    };
    candidates.shuffle(&mut rng);
    if let Some(base) = base {
        let counts = signal_counts(base.as_slice(), l);
        candidates.sort_by_key(|w| counts.get(w).copied().unwrap_or(0));
    }
    Ok(WFamily {
        block_length: l,
        blocks: candidates.iter().take(k).map(|w| compose(w)).collect(),
    })
}

/// Sizes of the perturbation, see [`PerturbationPlan::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub epsilon: f64,
    /// Budget on the fraction of changed symbols.
    pub delta: f64,
    /// Number of sectors (and of signal blocks).
    #[serde(rename = "K")]
    pub k: usize,
    /// Signal block length.
    #[serde(rename = "L")]
    pub l: usize,
    /// Marker gap.
    pub r: usize,
    /// Sector length.
    #[serde(rename = "M")]
    pub m: usize,
    /// Distance between coarse markers, `K * M`.
    pub r1: usize,
    /// Shortest block length the construction controls.
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

/// `ceil(2 / epsilon^2)`, ignoring float noise below `1e-9` relative.
pub fn sector_count(epsilon: f64) -> usize {
    let x = 2.0 / (epsilon * epsilon);
    (x - x * 1e-9).ceil() as usize
}

/// Smallest marker gap allowed for block length `l` and budget `delta`.
pub fn minimal_marker_gap(l: usize, delta: f64) -> usize {
    let x = 2.0 * l as f64 / delta;
    (x - x * 1e-12).ceil() as usize
}

impl PerturbationPlan {
    /// Plan with `K = ceil(2 / epsilon^2)`, `r1 = K * M` and `N = 2r + 2`.
    pub fn new(epsilon: f64, delta: f64, l: usize, r: usize, m: usize, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidPlan(format!("epsilon must be in (0, 1), got {epsilon}")));
        }
        let k = sector_count(epsilon);
        let plan = PerturbationPlan {
            epsilon,
            delta,
            k,
            l,
            r,
            m,
            r1: k.saturating_mul(m),
            n: 2 * r + 2,
            seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_threshold(mut self, n: usize) -> Result<Self> {
        self.n = n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must be in (0, 1), got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.k < sector_count(self.epsilon) {
            return bad(format!(
                "K = {} is below 2 / epsilon^2 = {}",
                self.k,
                2.0 / (self.epsilon * self.epsilon)
            ));
        }
        check_length(self.l)?;
        if self.k as u64 > family_capacity(self.l) {
            return Err(Error::FamilyTooLarge {
                k: self.k,
                l: self.l,
                max: family_capacity(self.l),
            });
        }
        if self.r < self.l {
            return bad(format!("marker gap r = {} is shorter than L = {}", self.r, self.l));
        }
        let need = 2.0 * self.l as f64 / self.delta;
        if (self.r as f64) < need * (1.0 - 1e-12) {
            return bad(format!(
                "marker gap r = {} is below 2L/delta = {need:.4}: stamping alone could change more than delta/2 of the symbols; use r >= {}",
                self.r,
                minimal_marker_gap(self.l, self.delta)
            ));
        }
        if self.m <= self.r + 1 {
            return bad(format!(
                "sector length M = {} must exceed r + 1 = {}",
                self.m,
                self.r + 1
            ));
        }
        if self.r1 != self.k * self.m {
            return bad(format!("r1 = {} must equal K * M = {}", self.r1, self.k * self.m));
        }
        if self.n < 2 * self.r + 2 {
            return bad(format!("N = {} must be at least 2r + 2 = {}", self.n, 2 * self.r + 2));
        }
        Ok(())
    }
}

/// Markers and sectors laid over a sequence of a given length.
///
/// Coarse markers are the fine markers nearest to `first + j * r1`, so every
/// sector boundary that starts a span sits on a fine marker. Sector `k` of a
/// span starting at `a` covers `[a + k M, a + (k + 1) M)`, except the last,
/// which runs to the next coarse marker. Everything before the first and
/// after the last coarse marker is left alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorLayout {
    pub markers: MarkerSet,
    pub coarse: Vec<usize>,
    pub sectors: usize,
    pub sector_length: usize,
}

impl SectorLayout {
    pub fn build(len: usize, plan: &PerturbationPlan) -> Result<Self> {
        plan.validate()?;
        let markers = build_markers(len, plan.r, plan.seed)?;
        let first = markers.positions[0];
        let last = markers.positions[markers.len() - 1];
        let mut coarse: Vec<usize> = Vec::new();
        let mut target = first;
        while target <= last {
            let p = markers.positions[markers.nearest(target).expect("markers are nonempty")];
            if coarse.last() != Some(&p) {
                coarse.push(p);
            }
            target += plan.r1;
        }
        if coarse.len() < 2 {
            return Err(Error::SequenceTooShort {
                len,
                reason: format!("need two coarse markers r1 = {} apart", plan.r1),
            });
        }
        Ok(SectorLayout {
            markers,
            coarse,
            sectors: plan.k,
            sector_length: plan.m,
        })
    }

    pub fn active(&self) -> Range<usize> {
        self.coarse[0]..self.coarse[self.coarse.len() - 1]
    }

    /// Symbols outside the active window.
    pub fn edge_length(&self) -> usize {
        self.markers.sequence_length - self.active().len()
    }

    pub fn spans(&self) -> usize {
        self.coarse.len() - 1
    }

    /// `(span, sector)` containing `pos`, if it lies in the active window.
    pub fn locate(&self, pos: usize) -> Option<(usize, usize)> {
        if !self.active().contains(&pos) {
            return None;
        }
        let span = self.coarse.partition_point(|&c| c <= pos) - 1;
        let k = ((pos - self.coarse[span]) / self.sector_length).min(self.sectors - 1);
        Some((span, k))
    }

    pub fn sector_range(&self, span: usize, k: usize) -> Range<usize> {
        let a = self.coarse[span];
        let start = (a + k * self.sector_length).min(self.coarse[span + 1]);
        let end = if k + 1 == self.sectors {
            self.coarse[span + 1]
        } else {
            (a + (k + 1) * self.sector_length).min(self.coarse[span + 1])
        };
        start..end
    }

    /// Every `(span, sector, range)` in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Range<usize>)> + '_ {
        (0..self.spans()).flat_map(move |s| (0..self.sectors).map(move |k| (s, k, self.sector_range(s, k))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerCounts {
    pub r_markers: usize,
    pub r1_markers: usize,
    pub spans: usize,
    pub sectors: usize,
}

/// Upper bound on the changed fraction: stamping, replaced signal blocks,
/// and one stamp of slack for the window edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeBound {
    pub marker_term: f64,
    pub w_mass: f64,
    pub edge_term: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub plan: PerturbationPlan,
    pub sequence_length: usize,
    pub active_window: [usize; 2],
    pub edge_length: usize,
    pub markers: MarkerCounts,
    pub family: Vec<String>,
    pub stamps_per_sector: Vec<u64>,
    pub replacements_per_sector: Vec<u64>,
    /// Signal blocks starting in one sector and ending in the next.
    pub boundary_straddles: u64,
    pub change_fraction: f64,
    pub change_bound: ChangeBound,
}

#[derive(Debug, Clone)]
pub struct PerturbOutcome {
    pub sequence: SymbolSequence,
    pub change_fraction: f64,
    pub report: PlanReport,
    pub family: WFamily,
    pub layout: SectorLayout,
    /// Start of every stamped block.
    pub stamps: Vec<usize>,
    /// Start of every replaced block.
    pub replacements: Vec<usize>,
}

/// Stamps the sector's signal block right of every marker, then replaces
/// every other signal block inside each sector by the sector's own.
pub fn perturb(seq: &SymbolSequence, plan: &PerturbationPlan) -> Result<PerturbOutcome> {
    plan.validate()?;
    let family = make_w_family(plan.k, plan.l, plan.seed, Some(seq))?;
    perturb_with_family(seq, plan, family)
}

pub fn perturb_with_family(seq: &SymbolSequence, plan: &PerturbationPlan, family: WFamily) -> Result<PerturbOutcome> {
    plan.validate()?;
    if family.len() != plan.k || family.block_length() != plan.l {
        return Err(Error::InvalidPlan(format!(
            "family has {} blocks of length {}, plan needs {} of length {}",
            family.len(),
            family.block_length(),
            plan.k,
            plan.l
        )));
    }
    let len = seq.len();
    let l = plan.l;
    let layout = SectorLayout::build(len, plan)?;
    let active = layout.active();

    let base_counts = signal_counts(seq.as_slice(), l);
    let w_occurrences: u64 = (0..family.len())
        .map(|k| base_counts.get(family.inner(k)).copied().unwrap_or(0))
        .sum();

    let mut data = seq.as_slice().to_vec();
    let mut stamps_per_sector = vec![0u64; plan.k];
    let mut stamps = Vec::new();
    for &p in &layout.markers.positions {
        if p < active.start || p + l > active.end {
            continue;
        }
        let (_, k) = layout.locate(p).expect("inside the active window");
        data[p..p + l].copy_from_slice(family.get(k));
        stamps_per_sector[k] += 1;
        stamps.push(p);
    }

    let index = family.index();
    let mut replacements_per_sector = vec![0u64; plan.k];
    let mut replacements = Vec::new();
    let mut straddles = 0;
    for (_, k, range) in layout.iter() {
        let mut i = range.start;
        while i < range.end {
            let found = if i + l <= active.end {
                signal_at(&data, i, l).and_then(|w| index.get(w).copied())
            } else {
                None
            };
            match found {
                Some(j) => {
                    if j != k {
                        data[i..i + l].copy_from_slice(family.get(k));
                        replacements_per_sector[k] += 1;
                        replacements.push(i);
                    }
                    if i + l > range.end {
                        straddles += 1;
                    }
                    i += l;
                }
                None => i += 1,
            }
        }
    }

    let sequence = SymbolSequence::new(seq.alphabet(), data)?;
    let change_fraction = hamming_fraction(seq, &sequence)?;
    let marker_term = l as f64 / plan.r as f64;
    let w_mass = w_occurrences as f64 * l as f64 / len as f64;
    let edge_term = l as f64 / len as f64;
    let report = PlanReport {
        plan: plan.clone(),
        sequence_length: len,
        active_window: [active.start, active.end],
        edge_length: layout.edge_length(),
        markers: MarkerCounts {
            r_markers: layout.markers.len(),
            r1_markers: layout.coarse.len(),
            spans: layout.spans(),
            sectors: layout.spans() * plan.k,
        },
        family: family.labels(),
        stamps_per_sector,
        replacements_per_sector,
        boundary_straddles: straddles,
        change_fraction,
        change_bound: ChangeBound {
            marker_term,
            w_mass,
            edge_term,
            total: marker_term + w_mass + edge_term,
        },
    };
    Ok(PerturbOutcome {
        sequence,
        change_fraction,
        report,
        family,
        layout,
        stamps,
        replacements,
    })
}
