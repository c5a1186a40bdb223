//! Enumeration of every distinct block of a given length that occurs at least
//! `min_count` times.
//!
//! The first length is found with a polynomial rolling hash over all windows
//! (hashes are sorted to locate frequent values, then groups are confirmed by
//! direct comparison, so collisions never merge distinct blocks). Longer
//! lengths are reached by [`BlockSweep::advance`], which splits each frequent
//! group by the symbol that follows it: occurrences of a length `n + 1` block
//! are a subset of the occurrences of its length `n` prefix.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::symbolic::{Block, OccurrenceList, SymbolSequence};

const MODULUS: u64 = (1 << 61) - 1;
const BASE: u64 = 0x0d1c_3f5a_7b29_e641 % MODULUS;

fn mul_mod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let lo = (p as u64) & MODULUS;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

/// Rolling hashes of every length-`n` window of `data`.
fn window_hashes(data: &[u8], n: usize) -> Vec<u64> {
    let slots = data.len() + 1 - n;
    let mut top = 1u64;
    for _ in 1..n {
        top = mul_mod(top, BASE);
    }
    let mut out = Vec::with_capacity(slots);
    let mut h = 0u64;
    for &s in &data[..n] {
        h = add_mod(mul_mod(h, BASE), s as u64 + 1);
    }
    out.push(h);
    for i in n..data.len() {
        h = sub_mod(h, mul_mod(data[i - n] as u64 + 1, top));
        h = add_mod(mul_mod(h, BASE), data[i] as u64 + 1);
        out.push(h);
    }
    out
}

/// Splits positions sharing a hash into groups of identical content.
fn split_by_content(data: &[u8], n: usize, mut positions: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    while !positions.is_empty() {
        let rep = &data[positions[0]..positions[0] + n];
        let (same, rest): (Vec<usize>, Vec<usize>) = positions.iter().partition(|&&p| &data[p..p + n] == rep);
        out.push(same);
        positions = rest;
    }
}

/// Position groups, one per distinct length-`n` block with at least
/// `min_count` occurrences, ordered lexicographically by block content.
pub(crate) fn frequent_groups(data: &[u8], n: usize, min_count: usize) -> Vec<Vec<usize>> {
    let min_count = min_count.max(1);
    if n == 0 || n > data.len() {
        return Vec::new();
    }
    let hashes = window_hashes(data, n);
    let frequent: HashSet<u64> = if min_count == 1 {
        hashes.iter().copied().collect()
    } else {
        let mut sorted = hashes.clone();
        sorted.sort_unstable();
        let mut set = HashSet::new();
        let mut i = 0;
        while i < sorted.len() {
            let j = sorted[i..].partition_point(|&h| h == sorted[i]) + i;
            if j - i >= min_count {
                set.insert(sorted[i]);
            }
            i = j;
        }
        set
    };
    let mut by_hash: HashMap<u64, Vec<usize>> = HashMap::with_capacity(frequent.len());
    for (p, h) in hashes.iter().enumerate() {
        if frequent.contains(h) {
            by_hash.entry(*h).or_default().push(p);
        }
    }
    let mut groups = Vec::new();
    for (_, positions) in by_hash {
        if positions.len() >= min_count {
            split_by_content(data, n, positions, &mut groups);
        }
    }
    groups.retain(|g| g.len() >= min_count);
    groups.sort_unstable_by(|a, b| data[a[0]..a[0] + n].cmp(&data[b[0]..b[0] + n]));
    groups
}

/// Every distinct length-`n` block occurring at least `min_count` times,
/// sorted by pattern, with its occurrence list.
pub fn enumerate_blocks(seq: &SymbolSequence, n: usize, min_count: usize) -> Result<Vec<(Block, OccurrenceList)>> {
    BlockSweep::new(seq, n, min_count).map(|sweep| sweep.blocks())
}

/// Frequent blocks of a growing length over one sequence.
#[derive(Debug, Clone)]
pub struct BlockSweep<'a> {
    seq: &'a SymbolSequence,
    n: usize,
    min_count: usize,
    groups: Vec<Vec<usize>>,
}

impl<'a> BlockSweep<'a> {
    pub fn new(seq: &'a SymbolSequence, n: usize, min_count: usize) -> Result<Self> {
        if n == 0 || n > seq.len() {
            return Err(Error::BlockTooLong {
                block: n,
                sequence: seq.len(),
            });
        }
        let min_count = min_count.max(1);
        Ok(BlockSweep {
            seq,
            n,
            min_count,
            groups: frequent_groups(seq.as_slice(), n, min_count),
        })
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    /// Occurrence positions, one sorted list per qualifying block.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn pattern(&self, group: usize) -> &'a [u8] {
        let p = self.groups[group][0];
        &self.seq.as_slice()[p..p + self.n]
    }

    pub fn blocks(&self) -> Vec<(Block, OccurrenceList)> {
        (0..self.groups.len())
            .map(|g| {
                let block = Block::new(self.seq.alphabet(), self.pattern(g).to_vec())
                    .expect("pattern taken from a valid sequence");
                let occ = OccurrenceList::new(self.groups[g].clone(), self.seq.len(), self.n)
                    .expect("positions are sorted and in range");
                (block, occ)
            })
            .collect()
    }

    /// Moves to length `n + 1`. Returns false (leaving the sweep unchanged)
    /// when the longer block no longer fits.
    pub fn advance(&mut self) -> bool {
        let data = self.seq.as_slice();
        let n = self.n;
        if n + 1 > data.len() {
            return false;
        }
        let l = self.seq.alphabet().size();
        let mut next = Vec::new();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); l];
        for group in &self.groups {
            for &p in group {
                if p + n < data.len() {
                    buckets[data[p + n] as usize].push(p);
                }
            }
            for b in buckets.iter_mut() {
                if b.len() >= self.min_count {
                    next.push(std::mem::take(b));
                } else {
                    b.clear();
                }
            }
        }
        self.groups = next;
        self.n += 1;
        true
    }
}
