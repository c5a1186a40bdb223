//! Semiperiodic markers: a seeded set of positions whose consecutive gaps are
//! all `r` or `r + 1`.
//!
//! Sparse cuts with gaps in `[r^2, 2 r^2]` are laid down first; every gap
//! `m >= r^2` is then split into `a` pieces of length `r` followed by `b`
//! pieces of length `r + 1`, with `b = m mod r` as small as possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cut positions with every gap in `[r^2, 2 r^2]`. The first cut is uniform in
/// `[0, r^2)`.
pub fn sparse_cuts(len: usize, r: usize, seed: u64) -> Result<Vec<usize>> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "marker gap r must be at least 2, got {r}"
        )));
    }
    let sq = r
        .checked_mul(r)
        .ok_or_else(|| Error::InvalidParameter(format!("r = {r} is too large")))?;
    if len <= sq {
        return Err(Error::SequenceTooShort {
            len,
            reason: format!("markers with r = {r} need more than r^2 = {sq} symbols"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cuts = vec![rng.random_range(0..sq)];
    loop {
        let next = cuts[cuts.len() - 1] + rng.random_range(sq..=2 * sq);
        if next >= len {
            break;
        }
        cuts.push(next);
    }
    Ok(cuts)
}

/// Splits `m` into pieces of length `r` and `r + 1`, using as few long
/// pieces as possible and putting them last.
pub fn subdivide_gap(m: usize, r: usize) -> Result<Vec<usize>> {
    if r < 1 {
        return Err(Error::Unsolvable { m, r });
    }
    let b = m % r;
    if b * (r + 1) > m {
        return Err(Error::Unsolvable { m, r });
    }
    let a = (m - b * (r + 1)) / r;
    let mut out = vec![r; a];
    out.resize(a + b, r + 1);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerSet {
    pub r: usize,
    pub positions: Vec<usize>,
    pub sequence_length: usize,
}

impl MarkerSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Gaps between consecutive markers; all lie in `{r, r + 1}`.
    pub fn interior_gaps(&self) -> impl Iterator<Item = usize> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    /// Lengths before the first marker and from the last marker to the end.
    pub fn edge_lengths(&self) -> (usize, usize) {
        match (self.positions.first(), self.positions.last()) {
            (Some(&first), Some(&last)) => (first, self.sequence_length - last),
            _ => (self.sequence_length, 0),
        }
    }

    /// Index of the marker nearest to `target` (ties go left).
    pub fn nearest(&self, target: usize) -> Option<usize> {
        let i = self.positions.partition_point(|&p| p < target);
        match (i.checked_sub(1), self.positions.get(i)) {
            (Some(j), Some(&right)) if target - self.positions[j] <= right - target => Some(j),
            (_, Some(_)) => Some(i),
            (Some(j), None) => Some(j),
            (None, None) => None,
        }
    }
}

pub fn build_markers(len: usize, r: usize, seed: u64) -> Result<MarkerSet> {
    let cuts = sparse_cuts(len, r, seed)?;
    let mut positions = vec![cuts[0]];
    for w in cuts.windows(2) {
        let mut at = w[0];
        for piece in subdivide_gap(w[1] - w[0], r)? {
            at += piece;
            positions.push(at);
        }
    }
    Ok(MarkerSet {
        r,
        positions,
        sequence_length: len,
    })
}
