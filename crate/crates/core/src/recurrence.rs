//! Return and entry times of a block, their Kac-normalized empirical
//! distribution functions, and the window-count variable `I`.
//!
//! Times follow the `tau_B = min { k >= 1 : occurrence at origin + k }`
//! convention for both returns (origin on an occurrence) and entries (any
//! origin). Normalization multiplies by the empirical measure `mu_hat`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{empirical_measure, OccurrenceList};

/// Gaps between consecutive occurrences of a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapList {
    pub gaps: Vec<u64>,
    pub mu_hat: f64,
}

impl GapList {
    pub fn mean(&self) -> f64 {
        self.gaps.iter().sum::<u64>() as f64 / self.gaps.len() as f64
    }
}

pub fn return_gaps(occ: &OccurrenceList) -> Result<GapList> {
    if occ.len() < 2 {
        return Err(Error::TooFewOccurrences {
            needed: 2,
            found: occ.len(),
        });
    }
    let gaps = occ.positions().windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    Ok(GapList {
        gaps,
        mu_hat: empirical_measure(occ)?,
    })
}

/// Entry times sampled from origins `0, stride, 2 * stride, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryTimes {
    pub times: Vec<u64>,
    /// Origins with no later occurrence inside the sequence.
    pub censored: usize,
    pub stride: usize,
}

pub fn entry_times(occ: &OccurrenceList, stride: usize) -> Result<EntryTimes> {
    if occ.is_empty() {
        return Err(Error::TooFewOccurrences { needed: 1, found: 0 });
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    let pos = occ.positions();
    let mut times = Vec::new();
    let mut censored = 0;
    let mut next = 0;
    for origin in (0..occ.sequence_length()).step_by(stride) {
        while next < pos.len() && pos[next] <= origin {
            next += 1;
        }
        match pos.get(next) {
            Some(&p) => times.push((p - origin) as u64),
            None => censored += 1,
        }
    }
    Ok(EntryTimes {
        times,
        censored,
        stride,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfKind {
    Return,
    Entry,
}

/// Right-continuous step function `F(t) = #{samples with mu_hat * tau <= t} / N`.
///
/// Samples are stored as distinct integer times with multiplicities, so the
/// millions of entry samples of a long sequence stay compact.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    kind: CdfKind,
    mu_hat: f64,
    taus: Vec<u64>,
    support: Vec<f64>,
    cumulative: Vec<u64>,
    total: u64,
    // integral of 1 - F from 0 up to each support point
    survival_integral: Vec<f64>,
}

impl EmpiricalCdf {
    /// From `(tau, multiplicity)` pairs; zero multiplicities are dropped.
    pub fn from_counts(kind: CdfKind, mu_hat: f64, mut counts: Vec<(u64, u64)>) -> Result<Self> {
        if !mu_hat.is_finite() || mu_hat <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "mu_hat must be positive, got {mu_hat}"
            )));
        }
        counts.retain(|&(_, c)| c > 0);
        if counts.is_empty() {
            return Err(Error::Empty("samples"));
        }
        counts.sort_unstable();
        let mut taus: Vec<u64> = Vec::with_capacity(counts.len());
        let mut cumulative: Vec<u64> = Vec::with_capacity(counts.len());
        let mut running = 0;
        for (tau, c) in counts {
            running += c;
            if taus.last() == Some(&tau) {
                *cumulative.last_mut().unwrap() = running;
            } else {
                taus.push(tau);
                cumulative.push(running);
            }
        }
        let support: Vec<f64> = taus.iter().map(|&t| mu_hat * t as f64).collect();
        let total = running;
        let mut survival_integral = Vec::with_capacity(support.len());
        let mut acc = support[0];
        survival_integral.push(acc);
        for i in 1..support.len() {
            let below = 1.0 - cumulative[i - 1] as f64 / total as f64;
            acc += below * (support[i] - support[i - 1]);
            survival_integral.push(acc);
        }
        Ok(EmpiricalCdf {
            kind,
            mu_hat,
            taus,
            support,
            cumulative,
            total,
            survival_integral,
        })
    }

    pub fn kind(&self) -> CdfKind {
        self.kind
    }

    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    pub fn n_samples(&self) -> u64 {
        self.total
    }

    /// Sorted distinct normalized times.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Sorted distinct raw integer times.
    pub fn taus(&self) -> &[u64] {
        &self.taus
    }

    /// `F` at the `i`-th support point.
    pub fn value_at(&self, i: usize) -> f64 {
        self.cumulative[i] as f64 / self.total as f64
    }

    /// `F(t)`, right-continuous.
    pub fn eval(&self, t: f64) -> f64 {
        match self.support.partition_point(|&s| s <= t) {
            0 => 0.0,
            k => self.value_at(k - 1),
        }
    }

    /// `F(t-)`.
    pub fn left_limit(&self, t: f64) -> f64 {
        match self.support.partition_point(|&s| s < t) {
            0 => 0.0,
            k => self.value_at(k - 1),
        }
    }

    /// `F` as evaluated at raw time `tau`, i.e. at `mu_hat * tau` without
    /// floating-point rounding at the jump.
    pub fn eval_tau(&self, tau: u64) -> f64 {
        match self.taus.partition_point(|&s| s <= tau) {
            0 => 0.0,
            k => self.value_at(k - 1),
        }
    }

    /// Integral of `1 - F` over `[0, t]`, exact for the step function.
    pub fn survival_integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.support.partition_point(|&s| s <= t) {
            0 => t,
            k => {
                let i = k - 1;
                self.survival_integral[i] + (1.0 - self.value_at(i)) * (t - self.support[i])
            }
        }
    }

    pub fn mean(&self) -> f64 {
        let mut prev = 0;
        let mut acc = 0.0;
        for (i, &s) in self.support.iter().enumerate() {
            acc += s * (self.cumulative[i] - prev) as f64;
            prev = self.cumulative[i];
        }
        acc / self.total as f64
    }

    /// `(t, F(t))` at every support point.
    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.support.len())
            .map(|i| [self.support[i], self.value_at(i)])
            .collect()
    }

    /// At most `max_points` support points, evenly spaced by index and always
    /// keeping the last one.
    pub fn thinned_points(&self, max_points: usize) -> Vec<[f64; 2]> {
        let n = self.support.len();
        if max_points == 0 || n <= max_points {
            return self.points();
        }
        let mut idx: Vec<usize> = (0..max_points)
            .map(|j| (j * (n - 1)) / (max_points - 1).max(1))
            .collect();
        idx.dedup();
        idx.into_iter().map(|i| [self.support[i], self.value_at(i)]).collect()
    }
}

/// ECDF of normalized integer samples.
pub fn ecdf(samples: &[u64], mu_hat: f64, kind: CdfKind) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let mut counts: Vec<(u64, u64)> = Vec::new();
    for s in sorted {
        match counts.last_mut() {
            Some((t, c)) if *t == s => *c += 1,
            _ => counts.push((s, 1)),
        }
    }
    EmpiricalCdf::from_counts(kind, mu_hat, counts)
}

pub fn return_ecdf(gaps: &GapList) -> Result<EmpiricalCdf> {
    ecdf(&gaps.gaps, gaps.mu_hat, CdfKind::Return)
}

/// Entry-time ECDF over every origin (stride 1), built from the gaps alone.
///
/// Origins in `[p_j, p_{j+1})` see entry times `g, g - 1, ..., 1` for the gap
/// `g = p_{j+1} - p_j`, and origins before the first occurrence see
/// `p_0, ..., 1`, so the multiplicity of time `k` is the number of such
/// segments of length at least `k`. Equals `ecdf(entry_times(occ, 1))`.
pub fn entry_ecdf(occ: &OccurrenceList) -> Result<(EmpiricalCdf, usize)> {
    let pos = occ.positions();
    if pos.is_empty() {
        return Err(Error::TooFewOccurrences { needed: 1, found: 0 });
    }
    let censored = occ.sequence_length() - pos[pos.len() - 1];
    if pos.len() == 1 && pos[0] == 0 {
        return Err(Error::TooFewOccurrences { needed: 2, found: 1 });
    }
    let segments = std::iter::once(pos[0])
        .chain(pos.windows(2).map(|w| w[1] - w[0]))
        .filter(|&s| s > 0);
    let max = pos[0].max(pos.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0));
    let mut hist = vec![0u64; max + 2];
    for s in segments {
        hist[s] += 1;
    }
    // multiplicity of k = #segments of length >= k
    let mut counts = Vec::with_capacity(max);
    let mut running = 0;
    for k in (1..=max).rev() {
        running += hist[k];
        counts.push((k as u64, running));
    }
    counts.reverse();
    let cdf = EmpiricalCdf::from_counts(CdfKind::Entry, empirical_measure(occ)?, counts)?;
    Ok((cdf, censored))
}

/// Largest `k` with `k * mu <= t`, matching the float comparison used by
/// [`EmpiricalCdf::eval`].
pub(crate) fn lattice_floor(t: f64, mu: f64) -> u64 {
    if t.is_nan() || t < 0.0 {
        return 0;
    }
    let mut k = (t / mu).floor().min(u64::MAX as f64 / 2.0) as u64;
    while k > 0 && k as f64 * mu > t {
        k -= 1;
    }
    while ((k + 1) as f64) * mu <= t {
        k += 1;
    }
    k
}

/// `F_entry(t)` without materializing the ECDF; O(occurrences).
pub fn entry_cdf_at(occ: &OccurrenceList, t: f64) -> Result<f64> {
    let pos = occ.positions();
    let last = *pos.last().ok_or(Error::TooFewOccurrences { needed: 1, found: 0 })?;
    if last == 0 {
        return Err(Error::TooFewOccurrences { needed: 2, found: 1 });
    }
    let k = lattice_floor(t, empirical_measure(occ)?);
    let hit: u64 = std::iter::once(pos[0])
        .chain(pos.windows(2).map(|w| w[1] - w[0]))
        .map(|s| (s as u64).min(k))
        .sum();
    Ok(hit as f64 / last as f64)
}

/// `F~(t)` without materializing the ECDF; O(occurrences).
pub fn return_cdf_at(occ: &OccurrenceList, t: f64) -> Result<f64> {
    if occ.len() < 2 {
        return Err(Error::TooFewOccurrences {
            needed: 2,
            found: occ.len(),
        });
    }
    let k = lattice_floor(t, empirical_measure(occ)?);
    let pos = occ.positions();
    let hit = pos.windows(2).filter(|w| (w[1] - w[0]) as u64 <= k).count();
    Ok(hit as f64 / (pos.len() - 1) as f64)
}

/// `mu_hat * mean(gaps)`; tends to 1 for ergodic sources.
pub fn kac_statistic(gaps: &GapList) -> f64 {
    gaps.mu_hat * gaps.mean()
}

/// Statistics of `I(x) = #{0 <= j <= floor(t / mu_hat) : occurrence at x + j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub t: f64,
    pub window: usize,
    pub origins: usize,
    pub mean_i: f64,
    pub mean_i_given_pos: f64,
    pub p_pos: f64,
}

/// Exact window-count statistics over every origin whose window fits.
pub fn cluster_stats(occ: &OccurrenceList, t: f64) -> Result<ClusterStats> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let mu = empirical_measure(occ)?;
    if mu == 0.0 {
        return Err(Error::TooFewOccurrences { needed: 1, found: 0 });
    }
    let slots = occ.slots();
    let span = (t / mu).floor();
    if span >= slots as f64 {
        return Err(Error::WindowTooLarge {
            window: if span < usize::MAX as f64 {
                span as usize + 1
            } else {
                usize::MAX
            },
            slots,
        });
    }
    let window = span as usize + 1;
    let origins = slots - window + 1;
    let x_max = origins - 1;
    let mut sum_i: u64 = 0;
    let mut positive: u64 = 0;
    let mut covered_to: Option<usize> = None; // last origin already counted
    for &p in occ.positions() {
        let lo = (p + 1).saturating_sub(window);
        if lo > x_max {
            break;
        }
        let hi = p.min(x_max);
        sum_i += (hi - lo + 1) as u64;
        let start = match covered_to {
            Some(c) if c >= lo => c + 1,
            _ => lo,
        };
        if start <= hi {
            positive += (hi - start + 1) as u64;
            covered_to = Some(hi);
        }
    }
    let mean_i = sum_i as f64 / origins as f64;
    let p_pos = positive as f64 / origins as f64;
    let mean_i_given_pos = if positive == 0 {
        0.0
    } else {
        sum_i as f64 / positive as f64
    };
    Ok(ClusterStats {
        t,
        window,
        origins,
        mean_i,
        mean_i_given_pos,
        p_pos,
    })
}

/// Largest float strictly below `x` (for finite positive or negative `x`).
fn prev_float(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

/// Kolmogorov-Smirnov distance between a step ECDF and a reference CDF.
///
/// Checked at every jump on both sides: `|F(s) - G(s)|` and
/// `|F(s-) - G(s-)|`, with `G(s-)` taken at the float just below `s`. For a
/// continuous `G` this is the exact supremum; for a step `G` sharing the
/// jumps of `F` it is zero.
pub fn ks_distance<G: Fn(f64) -> f64>(f: &EmpiricalCdf, g: G) -> f64 {
    let mut sup: f64 = 0.0;
    let mut below = 0.0;
    for (i, &s) in f.support().iter().enumerate() {
        let v = f.value_at(i);
        sup = sup.max((v - g(s)).abs());
        sup = sup.max((below - g(prev_float(s))).abs());
        below = v;
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{scan_occurrences, Alphabet, Block, SymbolSequence};
    use proptest::prelude::*;

    fn occ_of(seq: &str, b: &str) -> OccurrenceList {
        scan_occurrences(&SymbolSequence::binary(seq).unwrap(), &Block::binary(b).unwrap()).unwrap()
    }

    /// Independent per-origin scan straight over the raw symbols.
    fn brute_entry(data: &[u8], b: &[u8], stride: usize) -> (Vec<u64>, usize) {
        let hit = |i: usize| i + b.len() <= data.len() && &data[i..i + b.len()] == b;
        let mut times = Vec::new();
        let mut censored = 0;
        for origin in (0..data.len()).step_by(stride) {
            match (1..data.len() - origin).find(|&k| hit(origin + k)) {
                Some(k) => times.push(k as u64),
                None => censored += 1,
            }
        }
        (times, censored)
    }

    #[test]
    fn gap_examples() {
        let occ = OccurrenceList::new(vec![0, 2, 5], 10, 1).unwrap();
        assert_eq!(return_gaps(&occ).unwrap().gaps, vec![2, 3]);
        let periodic = occ_of(&"01".repeat(50), "01");
        assert!(return_gaps(&periodic).unwrap().gaps.iter().all(|&g| g == 2));
        let single = OccurrenceList::new(vec![7], 10, 1).unwrap();
        assert!(matches!(return_gaps(&single), Err(Error::TooFewOccurrences { .. })));
    }

    #[test]
    fn entry_examples() {
        assert_eq!(entry_times(&occ_of("0010", "1"), 1).unwrap().times[0], 2);
        // origin on an occurrence start, next occurrence adjacent
        assert_eq!(entry_times(&occ_of("0110", "1"), 1).unwrap().times[1], 1);
        let e = entry_times(&occ_of(&"01".repeat(20), "0"), 1).unwrap();
        assert!(e.times.iter().all(|&k| k == 1 || k == 2));
        assert_eq!(e.censored, 2);
        let none = OccurrenceList::new(vec![], 4, 1).unwrap();
        assert!(entry_times(&none, 1).is_err());
    }

    #[test]
    fn ecdf_examples() {
        let f = ecdf(&[2, 3], 0.5, CdfKind::Return).unwrap();
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.eval(1.5), 1.0);
        assert_eq!(f.eval(0.99), 0.0);
        let one = ecdf(&[4], 0.1, CdfKind::Return).unwrap();
        assert_eq!(one.support().len(), 1);
        assert_eq!(one.left_limit(0.4), 0.0);
        assert_eq!(one.eval(0.4), 1.0);
        let f = ecdf(&[1, 5, 9], 0.2, CdfKind::Entry).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert!(ecdf(&[], 0.5, CdfKind::Return).is_err());
        assert!(ecdf(&[1], 0.0, CdfKind::Return).is_err());
    }

    #[test]
    fn kac_examples() {
        let t = 10_000;
        let occ = occ_of(&"01".repeat(t / 2), "01");
        let k = kac_statistic(&return_gaps(&occ).unwrap());
        assert!((k - 1.0).abs() < 1e-3);
    }

    #[test]
    fn cluster_examples() {
        // single occurrence covered by every window position that reaches it
        let mut data = vec![0u8; 1000];
        data[500] = 1;
        let s = SymbolSequence::new(Alphabet::BINARY, data).unwrap();
        let occ = scan_occurrences(&s, &Block::binary("1").unwrap()).unwrap();
        let c = cluster_stats(&occ, 0.05).unwrap();
        assert_eq!(c.window, 51);
        assert!((c.p_pos - 51.0 / c.origins as f64).abs() < 1e-15);
        assert_eq!(c.mean_i_given_pos, 1.0);

        let ones = SymbolSequence::new(Alphabet::BINARY, vec![1; 200]).unwrap();
        let occ = scan_occurrences(&ones, &Block::binary("1").unwrap()).unwrap();
        for t in [0.5, 3.0, 17.2] {
            let c = cluster_stats(&occ, t).unwrap();
            assert_eq!(c.window, t.floor() as usize + 1);
            assert_eq!(c.mean_i, c.window as f64);
            assert_eq!(c.mean_i_given_pos, c.window as f64);
            assert_eq!(c.p_pos, 1.0);
        }
        assert!(matches!(cluster_stats(&occ, 500.0), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn ks_examples() {
        let f = ecdf(&[1, 2, 2, 5], 0.25, CdfKind::Return).unwrap();
        assert_eq!(ks_distance(&f, |t| f.eval(t)), 0.0);
        let degenerate = ecdf(&[0, 0], 0.5, CdfKind::Entry).unwrap();
        let d = ks_distance(&degenerate, |t| if t <= 0.0 { 0.0 } else { 1.0 - (-t).exp() });
        assert_eq!(d, 1.0);
    }

    fn brute_cluster(occ: &OccurrenceList, t: f64) -> (f64, f64) {
        let mu = empirical_measure(occ).unwrap();
        let w = (t / mu).floor() as usize + 1;
        let origins = occ.slots() - w + 1;
        let mut sum = 0;
        let mut pos = 0;
        for x in 0..origins {
            let i = occ.positions().iter().filter(|&&p| p >= x && p < x + w).count();
            sum += i;
            pos += (i > 0) as usize;
        }
        (sum as f64 / origins as f64, pos as f64 / origins as f64)
    }

    proptest! {
        #[test]
        fn entry_and_gaps_match_brute_force(
            data in prop::collection::vec(0u8..2, 2..400),
            b in prop::collection::vec(0u8..2, 1..4),
            stride in 1usize..4,
        ) {
            let s = SymbolSequence::new(Alphabet::BINARY, data.clone()).unwrap();
            let occ = scan_occurrences(&s, &Block::new(Alphabet::BINARY, b.clone()).unwrap()).unwrap();
            prop_assume!(occ.len() >= 2);
            let (times, censored) = brute_entry(&data, &b, stride);
            let e = entry_times(&occ, stride).unwrap();
            prop_assert_eq!(&e.times, &times);
            prop_assert_eq!(e.censored, censored);
            let (fast, fast_censored) = entry_ecdf(&occ).unwrap();
            let slow = ecdf(&entry_times(&occ, 1).unwrap().times, fast.mu_hat(), CdfKind::Entry).unwrap();
            prop_assert_eq!(fast.points(), slow.points());
            prop_assert_eq!(fast_censored, entry_times(&occ, 1).unwrap().censored);
        }

        #[test]
        fn point_values_match_full_ecdfs(
            data in prop::collection::vec(0u8..2, 2..400),
            b in prop::collection::vec(0u8..2, 1..4),
            t in 0.0f64..4.0,
        ) {
            let s = SymbolSequence::new(Alphabet::BINARY, data).unwrap();
            let occ = scan_occurrences(&s, &Block::new(Alphabet::BINARY, b).unwrap()).unwrap();
            prop_assume!(occ.len() >= 2);
            let (entry, _) = entry_ecdf(&occ).unwrap();
            prop_assert_eq!(entry_cdf_at(&occ, t).unwrap(), entry.eval(t));
            let ret = return_ecdf(&return_gaps(&occ).unwrap()).unwrap();
            prop_assert_eq!(return_cdf_at(&occ, t).unwrap(), ret.eval(t));
            // on-lattice points exercise the float boundary
            let on = entry.support()[entry.support().len() / 2];
            prop_assert_eq!(entry_cdf_at(&occ, on).unwrap(), entry.eval(on));
        }

        #[test]
        fn ecdf_is_monotone_and_reaches_one(samples in prop::collection::vec(1u64..50, 1..200), mu in 0.001f64..1.0) {
            let f = ecdf(&samples, mu, CdfKind::Return).unwrap();
            let pts = f.points();
            prop_assert!(pts.windows(2).all(|w| w[0][1] <= w[1][1] && w[0][0] < w[1][0]));
            prop_assert_eq!(pts.last().unwrap()[1], 1.0);
            prop_assert_eq!(f.eval(f64::INFINITY), 1.0);
        }

        #[test]
        fn cluster_identity_and_brute_force(
            data in prop::collection::vec(0u8..2, 50..300),
            b in prop::collection::vec(0u8..2, 1..3),
            t in 0.05f64..3.0,
        ) {
            let s = SymbolSequence::new(Alphabet::BINARY, data).unwrap();
            let occ = scan_occurrences(&s, &Block::new(Alphabet::BINARY, b).unwrap()).unwrap();
            prop_assume!(!occ.is_empty());
            let c = match cluster_stats(&occ, t) { Ok(c) => c, Err(_) => return Ok(()) };
            prop_assert!((c.mean_i - c.mean_i_given_pos * c.p_pos).abs() <= 1e-12 * c.mean_i.max(1.0));
            let (mean, p_pos) = brute_cluster(&occ, t);
            prop_assert!((c.mean_i - mean).abs() < 1e-12);
            prop_assert!((c.p_pos - p_pos).abs() < 1e-12);
        }
    }
}
