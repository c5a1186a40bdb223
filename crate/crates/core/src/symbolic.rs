//! Finite symbolic sequences, blocks (cylinder patterns) and exact occurrence
//! scanning.
//!
//! Symbols are small unsigned integers `0..alphabet.size()` stored as `u8` in
//! flat contiguous buffers. Occurrences of a block are counted with overlaps,
//! and every normalization uses the number of slots `len - n + 1` that can
//! host a block of length `n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct symbols `l`, with `2 <= l <= 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(u16);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);

    pub fn new(size: usize) -> Result<Self> {
        if (2..=256).contains(&size) {
            Ok(Alphabet(size as u16))
        } else {
            Err(Error::InvalidAlphabet(size))
        }
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, symbol: u8) -> bool {
        (symbol as usize) < self.size()
    }

    fn check(self, data: &[u8]) -> Result<()> {
        match data.iter().position(|&s| !self.contains(s)) {
            Some(index) => Err(Error::SymbolOutOfRange {
                symbol: data[index],
                index,
                size: self.size(),
            }),
            None => Ok(()),
        }
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;

    fn try_from(size: usize) -> Result<Self> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.size()
    }
}

/// Renders symbols as a digit string when the alphabet has at most ten
/// symbols, otherwise as comma-separated integers.
pub fn format_symbols(alphabet: Alphabet, data: &[u8]) -> String {
    if alphabet.size() <= 10 {
        data.iter().map(|&s| char::from(b'0' + s)).collect()
    } else {
        data.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Inverse of [`format_symbols`].
pub fn parse_symbols(alphabet: Alphabet, text: &str) -> Result<Vec<u8>> {
    let text = text.trim();
    let bad = |message: String| Error::Parse { line: 1, message };
    let data: Vec<u8> = if alphabet.size() <= 10 && !text.contains(',') {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| bad(format!("not a digit: {c:?}")))
            })
            .collect::<Result<_>>()?
    } else {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|tok| !tok.is_empty())
            .map(|tok| tok.parse::<u8>().map_err(|_| bad(format!("not a symbol: {tok:?}"))))
            .collect::<Result<_>>()?
    };
    alphabet.check(&data)?;
    Ok(data)
}

/// A finite window of a symbolic process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    alphabet: Alphabet,
    data: Vec<u8>,
}

impl SymbolSequence {
    pub fn new(alphabet: Alphabet, data: Vec<u8>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("sequence"));
        }
        alphabet.check(&data)?;
        Ok(SymbolSequence { alphabet, data })
    }

    /// Binary sequence from a digit string such as `"0101"`.
    pub fn binary(digits: &str) -> Result<Self> {
        Self::new(Alphabet::BINARY, parse_symbols(Alphabet::BINARY, digits)?)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    /// Copy of `range` as a new sequence over the same alphabet.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.len() || range.start >= range.end {
            return Err(Error::InvalidParameter(format!(
                "window {range:?} outside a sequence of length {}",
                self.len()
            )));
        }
        Ok(SymbolSequence {
            alphabet: self.alphabet,
            data: self.data[range].to_vec(),
        })
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbols(self.alphabet, &self.data))
    }
}

/// A cylinder pattern: the rare event whose recurrences are measured.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    alphabet: Alphabet,
    pattern: Vec<u8>,
}

impl Block {
    pub fn new(alphabet: Alphabet, pattern: Vec<u8>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Empty("block"));
        }
        alphabet.check(&pattern)?;
        Ok(Block { alphabet, pattern })
    }

    pub fn binary(digits: &str) -> Result<Self> {
        Self::new(Alphabet::BINARY, parse_symbols(Alphabet::BINARY, digits)?)
    }

    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        Self::new(alphabet, parse_symbols(alphabet, text)?)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.pattern
    }

    /// Smallest shift `0 < s < n` at which the block overlaps itself.
    pub fn self_overlap(&self) -> Option<usize> {
        let p = &self.pattern;
        (1..p.len()).find(|&s| p[s..] == p[..p.len() - s])
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbols(self.alphabet, &self.pattern))
    }
}

/// Start positions of a block inside a sequence, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceList {
    positions: Vec<usize>,
    sequence_length: usize,
    block_length: usize,
}

impl OccurrenceList {
    pub fn new(positions: Vec<usize>, sequence_length: usize, block_length: usize) -> Result<Self> {
        if block_length == 0 {
            return Err(Error::Empty("block"));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "occurrence positions must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = positions.last() {
            if last + block_length > sequence_length {
                return Err(Error::BlockTooLong {
                    block: block_length,
                    sequence: sequence_length - last,
                });
            }
        }
        Ok(OccurrenceList {
            positions,
            sequence_length,
            block_length,
        })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sequence_length(&self) -> usize {
        self.sequence_length
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// Positions that can host the block: `len - n + 1`, or zero.
    pub fn slots(&self) -> usize {
        (self.sequence_length + 1).saturating_sub(self.block_length)
    }
}

/// All start positions of `block` in `seq`, overlaps included.
pub fn scan_occurrences(seq: &SymbolSequence, block: &Block) -> Result<OccurrenceList> {
    if seq.alphabet() != block.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: seq.alphabet().size(),
            right: block.alphabet().size(),
        });
    }
    let positions = find_all(seq.as_slice(), block.as_slice());
    Ok(OccurrenceList {
        positions,
        sequence_length: seq.len(),
        block_length: block.len(),
    })
}

/// Knuth-Morris-Pratt scan; linear in `hay.len() + needle.len()` even on
/// highly periodic input.
pub(crate) fn find_all(hay: &[u8], needle: &[u8]) -> Vec<usize> {
    let n = needle.len();
    if n == 0 || n > hay.len() {
        return Vec::new();
    }
    let mut fail = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && needle[i] != needle[k] {
            k = fail[k - 1];
        }
        if needle[i] == needle[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let mut out = Vec::new();
    let mut q = 0;
    for (i, &c) in hay.iter().enumerate() {
        while q > 0 && c != needle[q] {
            q = fail[q - 1];
        }
        if c == needle[q] {
            q += 1;
        }
        if q == n {
            out.push(i + 1 - n);
            q = fail[q - 1];
        }
    }
    out
}

/// Empirical measure of the block: hits over available slots.
pub fn empirical_measure(occ: &OccurrenceList) -> Result<f64> {
    let slots = occ.slots();
    if slots == 0 {
        return Err(Error::BlockTooLong {
            block: occ.block_length(),
            sequence: occ.sequence_length(),
        });
    }
    Ok(occ.len() as f64 / slots as f64)
}

/// Fraction of positions where two equal-length sequences differ.
///
/// A sequence-level stand-in for the partition distance that fixes the
/// identity pairing of symbols.
pub fn hamming_fraction(a: &SymbolSequence, b: &SymbolSequence) -> Result<f64> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: a.alphabet().size(),
            right: b.alphabet().size(),
        });
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diff = a.as_slice().iter().zip(b.as_slice()).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(hay: &[u8], needle: &[u8]) -> Vec<usize> {
        if needle.len() > hay.len() {
            return vec![];
        }
        (0..=hay.len() - needle.len())
            .filter(|&i| &hay[i..i + needle.len()] == needle)
            .collect()
    }

    fn occ(seq: &str, b: &str) -> Vec<usize> {
        let s = SymbolSequence::binary(seq).unwrap();
        let b = Block::binary(b).unwrap();
        scan_occurrences(&s, &b).unwrap().positions().to_vec()
    }

    #[test]
    fn scan_examples() {
        assert_eq!(occ("0101", "01"), vec![0, 2]);
        assert_eq!(occ("1111", "11"), vec![0, 1, 2]);
        assert!(occ("0101", "011").is_empty());
    }

    #[test]
    fn scan_rejects_alphabet_mismatch() {
        let s = SymbolSequence::new(Alphabet::new(3).unwrap(), vec![0, 1, 2]).unwrap();
        let b = Block::binary("01").unwrap();
        assert!(matches!(scan_occurrences(&s, &b), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn measure_examples() {
        let s = SymbolSequence::binary("0101").unwrap();
        let m = |b: &str| empirical_measure(&scan_occurrences(&s, &Block::binary(b).unwrap()).unwrap());
        assert!((m("01").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m("11").unwrap(), 0.0);
        assert_eq!(m("0101").unwrap(), 1.0);
        assert!(matches!(m("01010"), Err(Error::BlockTooLong { .. })));
    }

    #[test]
    fn hamming_examples() {
        let h = |a: &str, b: &str| {
            hamming_fraction(&SymbolSequence::binary(a).unwrap(), &SymbolSequence::binary(b).unwrap())
        };
        assert_eq!(h("0110", "0110").unwrap(), 0.0);
        assert_eq!(h("0000", "1111").unwrap(), 1.0);
        assert_eq!(h("0101", "0001").unwrap(), 0.25);
        assert!(matches!(h("01", "011"), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn construction_validates() {
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(257).is_err());
        assert!(SymbolSequence::binary("").is_err());
        assert!(SymbolSequence::new(Alphabet::BINARY, vec![0, 2]).is_err());
        assert!(Block::new(Alphabet::BINARY, vec![]).is_err());
        assert!(OccurrenceList::new(vec![3, 1], 10, 2).is_err());
        assert!(OccurrenceList::new(vec![9], 10, 2).is_err());
    }

    #[test]
    fn symbol_text_roundtrip_wide_alphabet() {
        let a = Alphabet::new(12).unwrap();
        let text = format_symbols(a, &[0, 11, 3]);
        assert_eq!(text, "0,11,3");
        assert_eq!(parse_symbols(a, &text).unwrap(), vec![0, 11, 3]);
    }

    #[test]
    fn self_overlap_detection() {
        assert_eq!(Block::binary("0101").unwrap().self_overlap(), Some(2));
        assert_eq!(Block::binary("00000001").unwrap().self_overlap(), None);
        assert_eq!(Block::binary("1").unwrap().self_overlap(), None);
    }

    fn seq_strategy(max: usize) -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        (2u8..5).prop_flat_map(move |l| (prop::collection::vec(0..l, 1..max), prop::collection::vec(0..l, 1..8)))
    }

    proptest! {
        #[test]
        fn kmp_matches_naive((hay, needle) in seq_strategy(2000)) {
            prop_assert_eq!(find_all(&hay, &needle), naive(&hay, &needle));
        }

        #[test]
        fn hamming_is_a_metric(
            a in prop::collection::vec(0u8..3, 64),
            b in prop::collection::vec(0u8..3, 64),
            c in prop::collection::vec(0u8..3, 64),
        ) {
            let al = Alphabet::new(3).unwrap();
            let (a, b, c) = (
                SymbolSequence::new(al, a).unwrap(),
                SymbolSequence::new(al, b).unwrap(),
                SymbolSequence::new(al, c).unwrap(),
            );
            let d = |x: &SymbolSequence, y: &SymbolSequence| hamming_fraction(x, y).unwrap();
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert_eq!(d(&a, &b) == 0.0, a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        }

        #[test]
        fn binary_single_symbol_measures_sum_to_one(data in prop::collection::vec(0u8..2, 1..500)) {
            let s = SymbolSequence::new(Alphabet::BINARY, data).unwrap();
            let m0 = empirical_measure(&scan_occurrences(&s, &Block::binary("0").unwrap()).unwrap()).unwrap();
            let m1 = empirical_measure(&scan_occurrences(&s, &Block::binary("1").unwrap()).unwrap()).unwrap();
            prop_assert!((m0 + m1 - 1.0).abs() < 1e-12);
        }
    }
}
