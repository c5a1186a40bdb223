//! Seeded generators of stationary symbolic processes.
//!
//! # Reproducibility contract
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` (crate
//! `rand_chacha`). A uniform variate in `[0, 1)` is `(next_u64() >> 11) *
//! 2^-53`; a categorical draw returns the first index `i` with `u < cum[i]`
//! (the last symbol absorbs the remainder). The generated sequence is
//! therefore bit-identical across runs and platforms for a fixed spec.
//!
//! Rotations run in 64-bit fixed point: the angle and the cut points are
//! scaled by `2^64`, the orbit is `phase + k * angle (mod 2^64)` with the
//! phase equal to the first `u64` of the seeded stream, and cells are
//! half-open `[c_i, c_{i+1})`, the last one wrapping around through zero.
//!
//! # Config schema (TOML)
//!
//! ```toml
//! kind = "iid"          # iid | markov | rotation | periodic
//! seed = 7              # optional, default 0; `--seed` overrides
//! p = [0.5, 0.5]        # iid: symbol probabilities
//! # markov:   matrix = [[0.9, 0.1], [0.3, 0.7]]  init = [0.75, 0.25]
//! # rotation: alpha = 0.6180339887498949        cuts = [0.0, 0.381966]
//! # periodic: word = "011"                      alphabet = 2 (optional)
//! ```

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{find_all, format_symbols, parse_symbols, Alphabet, Block, SymbolSequence};

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProcessKind {
    Iid {
        p: Vec<f64>,
    },
    Markov {
        matrix: Vec<Vec<f64>>,
        init: Vec<f64>,
    },
    Rotation {
        alpha: f64,
        cuts: Vec<f64>,
    },
    Periodic {
        #[serde(with = "word_repr")]
        word: Vec<u8>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<usize>,
    },
}

mod word_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Digits(String),
        Symbols(Vec<u8>),
    }

    pub fn serialize<S: Serializer>(word: &[u8], s: S) -> Result<S::Ok, S::Error> {
        if word.iter().all(|&w| w < 10) {
            s.serialize_str(&word.iter().map(|&w| char::from(b'0' + w)).collect::<String>())
        } else {
            s.collect_seq(word)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Symbols(v) => Ok(v),
            Repr::Digits(s) => s
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| serde::de::Error::custom(format!("not a digit: {c:?}")))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    #[serde(default)]
    pub seed: u64,
}

fn check_distribution(what: &str, p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidSpec(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidSpec(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

impl ProcessSpec {
    pub fn iid(p: Vec<f64>, seed: u64) -> Self {
        ProcessSpec {
            kind: ProcessKind::Iid { p },
            seed,
        }
    }

    pub fn markov(matrix: Vec<Vec<f64>>, init: Vec<f64>, seed: u64) -> Self {
        ProcessSpec {
            kind: ProcessKind::Markov { matrix, init },
            seed,
        }
    }

    pub fn rotation(alpha: f64, cuts: Vec<f64>, seed: u64) -> Self {
        ProcessSpec {
            kind: ProcessKind::Rotation { alpha, cuts },
            seed,
        }
    }

    pub fn periodic(word: Vec<u8>) -> Self {
        ProcessSpec {
            kind: ProcessKind::Periodic { word, alphabet: None },
            seed: 0,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProcessKind::Iid { .. } => "iid",
            ProcessKind::Markov { .. } => "markov",
            ProcessKind::Rotation { .. } => "rotation",
            ProcessKind::Periodic { .. } => "periodic",
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ProcessSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("process spec is always representable in TOML")
    }

    /// Alphabet implied by the parameters; also checks every invariant.
    pub fn validate(&self) -> Result<Alphabet> {
        match &self.kind {
            ProcessKind::Iid { p } => {
                check_distribution("p", p)?;
                Alphabet::new(p.len())
            }
            ProcessKind::Markov { matrix, init } => {
                let l = matrix.len();
                if init.len() != l || matrix.iter().any(|row| row.len() != l) {
                    return Err(Error::InvalidSpec(format!(
                        "markov matrix and init must be {l}x{l} and {l}"
                    )));
                }
                check_distribution("init", init)?;
                for (i, row) in matrix.iter().enumerate() {
                    check_distribution(&format!("matrix row {i}"), row)?;
                }
                Alphabet::new(l)
            }
            ProcessKind::Rotation { alpha, cuts } => {
                if !alpha.is_finite() {
                    return Err(Error::InvalidSpec("alpha must be finite".into()));
                }
                if cuts.iter().any(|&c| !(0.0..1.0).contains(&c)) || cuts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSpec("cuts must be strictly increasing in [0, 1)".into()));
                }
                Alphabet::new(cuts.len())
            }
            ProcessKind::Periodic { word, alphabet } => {
                if word.is_empty() {
                    return Err(Error::InvalidSpec("periodic word is empty".into()));
                }
                let needed = (*word.iter().max().unwrap() as usize + 1).max(2);
                let size = alphabet.unwrap_or(needed);
                if size < needed {
                    return Err(Error::InvalidSpec(format!(
                        "word uses symbol {} but alphabet={size}",
                        needed - 1
                    )));
                }
                Alphabet::new(size)
            }
        }
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn draw(cum: &[f64], u: f64) -> u8 {
    let last = cum.len() - 1;
    cum[..last].iter().position(|&c| u < c).unwrap_or(last) as u8
}

fn to_fixed(x: f64) -> u64 {
    // f64 -> u64 casts saturate, so values rounding up to 2^64 clamp.
    (x.rem_euclid(1.0) * 18_446_744_073_709_551_616.0) as u64
}

/// Draws `length` symbols from the process.
pub fn generate(spec: &ProcessSpec, length: usize) -> Result<SymbolSequence> {
    let alphabet = spec.validate()?;
    if length == 0 {
        return Err(Error::InvalidParameter("length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let data: Vec<u8> = match &spec.kind {
        ProcessKind::Iid { p } => {
            let cum = cumulative(p);
            (0..length).map(|_| draw(&cum, unit_f64(&mut rng))).collect()
        }
        ProcessKind::Markov { matrix, init } => {
            let rows: Vec<Vec<f64>> = matrix.iter().map(|r| cumulative(r)).collect();
            let mut state = draw(&cumulative(init), unit_f64(&mut rng));
            let mut out = Vec::with_capacity(length);
            out.push(state);
            for _ in 1..length {
                state = draw(&rows[state as usize], unit_f64(&mut rng));
                out.push(state);
            }
            out
        }
        ProcessKind::Rotation { alpha, cuts } => {
            let step = to_fixed(*alpha);
            let cuts: Vec<u64> = cuts.iter().map(|&c| to_fixed(c)).collect();
            let last = (cuts.len() - 1) as u8;
            let mut x = rng.next_u64();
            let mut out = Vec::with_capacity(length);
            for _ in 0..length {
                let cell = cuts.partition_point(|&c| c <= x);
                out.push(if cell == 0 { last } else { (cell - 1) as u8 });
                x = x.wrapping_add(step);
            }
            out
        }
        ProcessKind::Periodic { word, .. } => word.iter().copied().cycle().take(length).collect(),
    };
    SymbolSequence::new(alphabet, data)
}

/// Exact stationary measure of a block for iid, Markov (under the given
/// initial law) and periodic (uniform phase) processes.
pub fn exact_block_probability(spec: &ProcessSpec, block: &Block) -> Result<f64> {
    let alphabet = spec.validate()?;
    if alphabet != block.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: alphabet.size(),
            right: block.alphabet().size(),
        });
    }
    let b = block.as_slice();
    match &spec.kind {
        ProcessKind::Iid { p } => Ok(b.iter().map(|&s| p[s as usize]).product()),
        ProcessKind::Markov { matrix, init } => Ok(b
            .windows(2)
            .map(|w| matrix[w[0] as usize][w[1] as usize])
            .product::<f64>()
            * init[b[0] as usize]),
        ProcessKind::Periodic { word, .. } => {
            let period = word.len();
            let reps = b.len().div_ceil(period) + 1;
            let unrolled: Vec<u8> = word.iter().copied().cycle().take(period * reps).collect();
            let hits = find_all(&unrolled, b).into_iter().filter(|&i| i < period).count();
            Ok(hits as f64 / period as f64)
        }
        ProcessKind::Rotation { .. } => Err(Error::Unsupported("rotation")),
    }
}

/// Parses a block written for this spec's alphabet.
pub fn parse_block(spec: &ProcessSpec, text: &str) -> Result<Block> {
    let alphabet = spec.validate()?;
    Block::new(alphabet, parse_symbols(alphabet, text)?)
}

impl std::fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ProcessKind::Periodic { word, .. } => {
                let a = self.validate().map_err(|_| std::fmt::Error)?;
                write!(f, "periodic({})", format_symbols(a, word))
            }
            _ => write!(f, "{}(seed={})", self.kind_name(), self.seed),
        }
    }
}
