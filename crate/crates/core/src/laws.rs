//! Reference limit laws, the entry/return integral relation and the
//! attracting / neutral / repelling classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recurrence::{lattice_floor, EmpiricalCdf};

pub const DEFAULT_T_GRID: [f64; 6] = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0];
pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_EPSILON: f64 = 0.5;

/// A distribution function on `[0, inf)` together with the integral of its
/// survival function, which is what the integral relation needs.
pub trait DistributionFunction {
    fn cdf(&self, t: f64) -> f64;

    /// `int_0^t (1 - F(s)) ds`.
    fn integrated_survival(&self, t: f64) -> f64;
}

/// Exponential law with parameter one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpLaw;

impl DistributionFunction for ExpLaw {
    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            -(-t).exp_m1()
        }
    }

    fn integrated_survival(&self, t: f64) -> f64 {
        // int_0^t e^{-s} ds = 1 - e^{-t}
        self.cdf(t)
    }
}

impl DistributionFunction for EmpiricalCdf {
    fn cdf(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn integrated_survival(&self, t: f64) -> f64 {
        self.survival_integral(t)
    }
}

/// `1 - e^{-t}`.
pub fn exp_law(t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidParameter(format!("t must be nonnegative, got {t}")));
    }
    Ok(ExpLaw.cdf(t))
}

/// The entry law predicted from a return law: `t -> int_0^t (1 - F~(s)) ds`.
#[derive(Debug, Clone, Copy)]
pub struct StarTransform<'a, D: ?Sized>(&'a D);

impl<D: DistributionFunction + ?Sized> StarTransform<'_, D> {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.integrated_survival(t)
    }
}

pub fn star_transform<D: DistributionFunction + ?Sized>(returns: &D) -> StarTransform<'_, D> {
    StarTransform(returns)
}

/// `sup |F_entry(t) - int_0^t (1 - F~(s)) ds|` over `t in [0, t_max]`.
///
/// The grid is the set of normalized times where either ECDF jumps, plus `0`
/// and `t_max`. In discrete time both laws live on the lattice
/// `mu_hat * k`, the entry ECDF is flat between lattice points, and the
/// relation holds exactly at them; off-lattice points only measure the
/// lattice step.
pub fn star_residual(entry: &EmpiricalCdf, returns: &EmpiricalCdf, t_max: f64) -> f64 {
    let star = star_transform(returns);
    let mut grid: Vec<f64> = entry
        .support()
        .iter()
        .chain(returns.support())
        .copied()
        .filter(|&t| t <= t_max)
        .collect();
    grid.push(0.0);
    grid.push(t_max);
    grid.into_iter()
        .map(|t| (entry.eval(t) - star.eval(t)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyBoundReport {
    /// `max_t F_entry(t) - (1 - e^{-t})`, attained at a jump of `F_entry`.
    pub max_excess: f64,
    pub at_t: f64,
    pub tol: f64,
    pub exceeds: bool,
    pub caveat: String,
}

const ENTROPY_CAVEAT: &str = "the bound F(t) <= 1 - e^{-t} is only guaranteed for limit laws \
of positive-entropy processes; zero-entropy sources (periodic, rotations) may exceed it";

/// Largest excess of the entry ECDF over the exponential law.
pub fn check_entropy_bound(entry: &EmpiricalCdf, tol: f64) -> EntropyBoundReport {
    let (mut max_excess, mut at_t) = (0.0, 0.0);
    for (i, &s) in entry.support().iter().enumerate() {
        let excess = entry.value_at(i) - ExpLaw.cdf(s);
        if excess > max_excess {
            max_excess = excess;
            at_t = s;
        }
    }
    EntropyBoundReport {
        max_excess,
        at_t,
        tol,
        exceeds: max_excess > tol,
        caveat: ENTROPY_CAVEAT.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recurrence {
    Attracting,
    Neutral,
    Repelling,
}

impl std::fmt::Display for Recurrence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Recurrence::Attracting => "attracting",
            Recurrence::Neutral => "neutral",
            Recurrence::Repelling => "repelling",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVerdict {
    pub verdict: Recurrence,
    /// `[t, F_entry(t) - (1 - e^{-t})]` for each grid point.
    pub margins: Vec<[f64; 2]>,
    /// Half-width of the neutral band at each grid point.
    pub bands: Vec<f64>,
    pub per_t: Vec<Recurrence>,
    /// Statistical part of the band, shared by every grid point.
    pub tol: f64,
    /// `F_entry(epsilon) < epsilon^2`.
    pub strong: bool,
    pub epsilon: f64,
    pub strong_value: f64,
}

/// Conservative statistical band for comparing an ECDF with a continuous
/// law: a DKW band at level `alpha`, inflated threefold.
///
/// `samples` should count independent renewals, i.e. the number of observed
/// returns, not the number of (strongly correlated) entry origins.
pub fn default_tolerance(samples: u64, alpha: f64) -> f64 {
    let samples = samples.max(1) as f64;
    3.0 * ((2.0 / alpha).ln() / (2.0 * samples)).sqrt()
}

/// Entry law of a block recurring independently in every slot with
/// probability `mu`: geometric on the lattice `mu * k`.
pub fn independent_lattice_law(t: f64, mu: f64) -> f64 {
    let k = lattice_floor(t, mu);
    if k == 0 {
        0.0
    } else if mu >= 1.0 {
        1.0
    } else {
        -(k as f64 * (-mu).ln_1p()).exp_m1()
    }
}

/// Distance at `t` between the lattice law of an independent process with
/// rate `mu` and its continuous limit `1 - e^{-t}`; the neutral band is
/// widened by this much so that coarse lattices (frequent events) are not
/// misread as clustering.
pub fn lattice_bias(t: f64, mu: f64) -> f64 {
    (independent_lattice_law(t, mu) - ExpLaw.cdf(t)).abs()
}

/// Compares the entry ECDF with `1 - e^{-t}` on `t_grid`.
///
/// The band at `t` is `tol + lattice_bias(t, mu_hat)`. A point is attracting
/// when its margin is below minus the band, repelling above the band, neutral
/// otherwise. Overall: neutral if every point is, attracting if some point is
/// attracting and none repelling, repelling in the mirror case. When both
/// occur, attracting wins only if its largest deviation strictly exceeds the
/// repelling one.
pub fn classify(entry: &EmpiricalCdf, t_grid: &[f64], tol: f64, epsilon: f64) -> Result<ClusterVerdict> {
    if t_grid.is_empty() {
        return Err(Error::Empty("t grid"));
    }
    if t_grid.iter().any(|&t| !t.is_finite() || t < 0.0) {
        return Err(Error::InvalidParameter(
            "t grid values must be finite and nonnegative".into(),
        ));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be nonnegative, got {tol}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1), got {epsilon}"
        )));
    }
    let margins: Vec<[f64; 2]> = t_grid.iter().map(|&t| [t, entry.eval(t) - ExpLaw.cdf(t)]).collect();
    let bands: Vec<f64> = t_grid.iter().map(|&t| tol + lattice_bias(t, entry.mu_hat())).collect();
    let per_t: Vec<Recurrence> = margins
        .iter()
        .zip(&bands)
        .map(|(&[_, m], &band)| {
            if m < -band {
                Recurrence::Attracting
            } else if m > band {
                Recurrence::Repelling
            } else {
                Recurrence::Neutral
            }
        })
        .collect();
    let deepest_low = margins.iter().map(|m| -m[1]).fold(0.0, f64::max);
    let deepest_high = margins.iter().map(|m| m[1]).fold(0.0, f64::max);
    let any = |r: Recurrence| per_t.contains(&r);
    let verdict = match (any(Recurrence::Attracting), any(Recurrence::Repelling)) {
        (false, false) => Recurrence::Neutral,
        (true, false) => Recurrence::Attracting,
        (false, true) => Recurrence::Repelling,
        (true, true) if deepest_low > deepest_high => Recurrence::Attracting,
        (true, true) => Recurrence::Repelling,
    };
    let strong_value = entry.eval(epsilon);
    Ok(ClusterVerdict {
        verdict,
        margins,
        bands,
        per_t,
        tol,
        strong: strong_value < epsilon * epsilon,
        epsilon,
        strong_value,
    })
}
