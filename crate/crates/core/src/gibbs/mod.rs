//! The virtual-cache Markov chain.
//!
//! At each slot one BS is chosen uniformly and its column is redrawn from
//! the conditional Gibbs distribution given all other columns. Only the
//! neighbourhood of the chosen BS enters the conditional, and within it only
//! segments the BS covers, so the exponent reduces to
//! `base + sum of per-content gains` over the candidate column.

pub mod exact;

use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::CellTopology;
use crate::model::{CoverageCounts, Placement, SegmentRates};
use crate::rng::{substream, StreamRng, Substream};
use crate::subsets::{binomial, KSubsets};
use crate::{Error, Result};

/// Default cap on candidate columns per conditional draw.
pub const DEFAULT_COLUMN_LIMIT: u64 = 100_000;

/// Inverse-temperature schedule of the virtual chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    Fixed(f64),
    /// `β_t = β₀ ln(1 + ⌊t / N⌋)`, constant over each period of N slots.
    Annealed { beta0: f64 },
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaSchedule::Fixed(beta) if beta.is_finite() && beta >= 0.0 => Ok(()),
            BetaSchedule::Annealed { beta0 } if beta0.is_finite() && beta0 > 0.0 => Ok(()),
            BetaSchedule::Fixed(beta) | BetaSchedule::Annealed { beta0: beta } => {
                Err(Error::InvalidBeta { beta })
            }
        }
    }

    /// Inverse temperature used by the update performed at 0-based slot `t`.
    pub fn beta_at(&self, t: u64, n_bs: usize) -> f64 {
        match *self {
            BetaSchedule::Fixed(beta) => beta,
            BetaSchedule::Annealed { beta0 } => anneal_beta(beta0, t, n_bs),
        }
    }
}

pub fn anneal_beta(beta0: f64, t: u64, n_bs: usize) -> f64 {
    let period = t / n_bs as u64;
    beta0 * libm::log1p(period as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsParams {
    pub schedule: BetaSchedule,
    pub seed: u64,
    /// Maximum number of candidate columns `C(M, K)` per draw.
    pub column_limit: u64,
}

impl GibbsParams {
    pub fn new(schedule: BetaSchedule, seed: u64) -> Self {
        GibbsParams {
            schedule,
            seed,
            column_limit: DEFAULT_COLUMN_LIMIT,
        }
    }
}

/// Which admissibility conditions on `β₀` failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaViolation {
    /// `β₀ N Δ`, must be < 1.
    pub spread_product: f64,
    /// `β₀ max h`, must be < 1.
    pub peak_product: f64,
    pub spread_violated: bool,
    pub peak_violated: bool,
    /// Supremum of admissible `β₀` (itself excluded, both bounds are strict).
    pub max_admissible: f64,
}

pub fn validate_beta0(beta0: f64, delta: f64, h_max: f64, n_bs: usize) -> core::result::Result<(), BetaViolation> {
    let spread_product = beta0 * n_bs as f64 * delta;
    let peak_product = beta0 * h_max;
    let spread_violated = spread_product >= 1.0;
    let peak_violated = peak_product >= 1.0;
    if spread_violated || peak_violated {
        let by_spread = if delta > 0.0 {
            1.0 / (n_bs as f64 * delta)
        } else {
            f64::INFINITY
        };
        Err(BetaViolation {
            spread_product,
            peak_product,
            spread_violated,
            peak_violated,
            max_admissible: by_spread.min(1.0 / h_max),
        })
    } else {
        Ok(())
    }
}

/// Worst-case total-variation bound after `periods` N-slot periods of the
/// fixed-β chain: `(1 - (e^{-βΔ} / (N C(M,K)))^N)^l`.
pub fn dobrushin_bound(beta: f64, delta: f64, n_bs: usize, n_contents: usize, cache_size: usize, periods: u64) -> f64 {
    let columns = binomial(n_contents, cache_size).unwrap_or(u128::MAX) as f64;
    let floor = libm::exp(-beta * delta) / (n_bs as f64 * columns);
    let contraction = 1.0 - libm::pow(floor, n_bs as f64);
    libm::pow(contraction, periods as f64)
}

/// Additive decomposition of the local energy of one column.
///
/// For a candidate column `c`, the exponent equals
/// `base + Σ_{i ∈ c} gains[i]`: a content adds its segment rate wherever no
/// other covering BS already holds it.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnGains {
    pub base: f64,
    pub gains: Vec<f64>,
}

impl ColumnGains {
    pub fn energy(&self, column: &[usize]) -> f64 {
        self.base + column.iter().map(|&i| self.gains[i]).sum::<f64>()
    }

    fn fill<R, F>(&mut self, top: &CellTopology, rates: &R, bs: usize, covered_by_others: F)
    where
        R: SegmentRates,
        F: Fn(usize, usize) -> bool,
    {
        self.base = 0.0;
        self.gains.iter_mut().for_each(|g| *g = 0.0);
        for &seg in top.segment_indices_containing(bs) {
            for (i, gain) in self.gains.iter_mut().enumerate() {
                let rate = rates.rate(i, seg);
                if covered_by_others(seg, i) {
                    self.base += rate;
                } else {
                    *gain += rate;
                }
            }
        }
    }

    /// Gains for column `bs` of `v` (the column itself is ignored).
    pub fn from_placement<R: SegmentRates>(top: &CellTopology, rates: &R, v: &Placement, bs: usize) -> Self {
        let mut out = ColumnGains {
            base: 0.0,
            gains: alloc::vec![0.0; v.n_contents()],
        };
        out.fill(top, rates, bs, |seg, i| {
            top.segment(seg).members.iter().any(|k| k != bs && v.holds(i, k))
        });
        out
    }
}

/// Conditional law of one column given the rest, over the lexicographic
/// list of candidate columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    pub candidates: Vec<Vec<usize>>,
    pub energies: Vec<f64>,
    pub probabilities: Vec<f64>,
}

pub fn conditional_distribution<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    v: &Placement,
    bs: usize,
    beta: f64,
    column_limit: u64,
) -> Result<ConditionalDistribution> {
    top.check_bs(bs)?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidBeta { beta });
    }
    check_column_limit(v.n_contents(), v.cache_size(), column_limit)?;
    let gains = ColumnGains::from_placement(top, rates, v, bs);
    let candidates = KSubsets::all(v.n_contents(), v.cache_size());
    let energies: Vec<f64> = candidates.iter().map(|c| gains.energy(c)).collect();
    let probabilities = softmax(&energies, beta);
    Ok(ConditionalDistribution {
        candidates,
        energies,
        probabilities,
    })
}

/// `exp(β e) / Σ exp(β e)`, shifted by the maximum exponent.
pub fn softmax(energies: &[f64], beta: f64) -> Vec<f64> {
    let top = energies
        .iter()
        .map(|&e| beta * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies.iter().map(|&e| libm::exp(beta * e - top)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn check_column_limit(n_contents: usize, cache_size: usize, limit: u64) -> Result<usize> {
    let count = binomial(n_contents, cache_size).unwrap_or(u128::MAX);
    if count > limit as u128 {
        return Err(Error::Capacity {
            what: "candidate columns",
            count,
            limit,
        });
    }
    Ok(count as usize)
}

/// The virtual configuration and the number of updates applied so far.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualState {
    pub placement: Placement,
    pub slot: u64,
}

/// Outcome of one chain update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Slot index after the update (the update produced `V(slot)`).
    pub slot: u64,
    pub bs: usize,
    pub beta: f64,
    pub changed: bool,
}

/// A single-owner Gibbs chain over placements of a fixed topology.
pub struct GibbsChain<'a> {
    top: &'a CellTopology,
    state: VirtualState,
    counts: CoverageCounts,
    schedule: BetaSchedule,
    bs_rng: StreamRng,
    column_rng: StreamRng,
    cursor: KSubsets,
    gains: ColumnGains,
    weights: Vec<f64>,
    old_column: Vec<bool>,
}

impl<'a> GibbsChain<'a> {
    pub fn new(top: &'a CellTopology, initial: Placement, params: &GibbsParams) -> Result<Self> {
        params.schedule.validate()?;
        initial.check_dims(initial.n_contents(), top.n_bs())?;
        let n_candidates = check_column_limit(initial.n_contents(), initial.cache_size(), params.column_limit)?;
        let m = initial.n_contents();
        Ok(GibbsChain {
            top,
            counts: CoverageCounts::new(top, &initial),
            cursor: KSubsets::new(m, initial.cache_size()),
            state: VirtualState {
                placement: initial,
                slot: 0,
            },
            schedule: params.schedule,
            bs_rng: substream(params.seed, Substream::BsPick),
            column_rng: substream(params.seed, Substream::ColumnSample),
            gains: ColumnGains {
                base: 0.0,
                gains: alloc::vec![0.0; m],
            },
            weights: Vec::with_capacity(n_candidates),
            old_column: alloc::vec![false; m],
        })
    }

    pub fn state(&self) -> &VirtualState {
        &self.state
    }

    pub fn placement(&self) -> &Placement {
        &self.state.placement
    }

    pub fn slot(&self) -> u64 {
        self.state.slot
    }

    /// Inverse temperature of the next update.
    pub fn next_beta(&self) -> f64 {
        self.schedule.beta_at(self.state.slot, self.top.n_bs())
    }

    pub fn pick_bs(&mut self) -> usize {
        self.bs_rng.gen_range(0..self.top.n_bs())
    }

    /// One full update: pick a BS uniformly, then redraw its column.
    pub fn step<R: SegmentRates>(&mut self, rates: &R) -> StepRecord {
        let bs = self.pick_bs();
        self.resample(rates, bs)
    }

    /// Redraws column `bs` from its conditional distribution under `rates`.
    pub fn resample<R: SegmentRates>(&mut self, rates: &R, bs: usize) -> StepRecord {
        let beta = self.next_beta();
        let placement = &self.state.placement;
        let counts = &self.counts;
        self.gains.fill(self.top, rates, bs, |seg, i| {
            counts.count(seg, i) > u32::from(placement.holds(i, bs))
        });

        self.weights.clear();
        self.cursor.reset();
        let mut peak = f64::NEG_INFINITY;
        loop {
            let e = beta * self.gains.energy(self.cursor.current());
            peak = peak.max(e);
            self.weights.push(e);
            if !self.cursor.advance() {
                break;
            }
        }
        let mut total = 0.0;
        for w in self.weights.iter_mut() {
            *w = libm::exp(*w - peak);
            total += *w;
        }
        let mut u = self.column_rng.gen::<f64>() * total;
        let mut pick = self.weights.len() - 1;
        for (idx, &w) in self.weights.iter().enumerate() {
            if u < w {
                pick = idx;
                break;
            }
            u -= w;
        }
        self.cursor.reset();
        for _ in 0..pick {
            self.cursor.advance();
        }

        self.old_column.copy_from_slice(self.state.placement.column(bs));
        self.state.placement.overwrite_column(bs, self.cursor.current());
        let changed = self.old_column.as_slice() != self.state.placement.column(bs);
        if changed {
            self.counts
                .apply_column_change(self.top, bs, &self.old_column, self.state.placement.column(bs));
        }
        self.state.slot += 1;
        StepRecord {
            slot: self.state.slot,
            bs,
            beta,
            changed,
        }
    }
}
