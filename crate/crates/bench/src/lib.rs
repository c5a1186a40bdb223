//! Fixtures shared by the benchmarks in `benches/`.

use serieslaw::{generate, ProcessSpec, SymbolSequence};

/// Seeded Bernoulli sequence with `P(1) = p_one`.
pub fn bernoulli(p_one: f64, length: usize, seed: u64) -> SymbolSequence {
    let spec = ProcessSpec::iid(vec![1.0 - p_one, p_one], seed);
    generate(&spec, length).expect("valid fixture spec")
}
