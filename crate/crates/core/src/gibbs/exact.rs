//! Exact diagnostics by full enumeration of the placement space.
//!
//! Only usable on small instances; every entry point goes through a
//! [`PlacementSpace`], which enforces the enumeration limit.

use alloc::vec::Vec;

use super::{conditional_distribution, softmax};
use crate::geometry::CellTopology;
use crate::model::{hit_rate_with, Placement, SegmentRates};
use crate::subsets::{KSubsets, PlacementSpace};
use crate::{Error, Result};

/// Default cap on `C(M,K)^N` for exact computations.
pub const DEFAULT_SPACE_LIMIT: u64 = 1_000_000;

/// Hit rate of every placement, in space order.
pub fn hit_rates<R: SegmentRates>(top: &CellTopology, rates: &R, space: &PlacementSpace) -> Vec<f64> {
    space.iter().map(|p| hit_rate_with(top, rates, &p)).collect()
}

/// Stationary law `e^{β h(B)} / Z_β` of the fixed-β chain, in space order.
pub fn stationary_distribution<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    space: &PlacementSpace,
    beta: f64,
) -> Result<Vec<f64>> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidBeta { beta });
    }
    Ok(softmax(&hit_rates(top, rates, space), beta))
}

/// `Σ_B π(B) h(B)`.
pub fn expected_hit_rate(hit_rates: &[f64], distribution: &[f64]) -> f64 {
    hit_rates.iter().zip(distribution).map(|(h, p)| h * p).sum()
}

/// Exact one-slot transition matrix of the fixed-β chain (uniform BS pick
/// followed by a conditional column draw), indexed in space order.
pub fn transition_matrix<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    space: &PlacementSpace,
    beta: f64,
) -> Result<Vec<Vec<f64>>> {
    let size = space.len() as usize;
    let n = top.n_bs();
    let radix = space.n_columns() as u64;
    let mut matrix = alloc::vec![alloc::vec![0.0; size]; size];
    for (from, b) in space.iter().enumerate() {
        for j in 0..n {
            let weight = libm::pow(radix as f64, (n - 1 - j) as f64) as u64;
            let digit = (from as u64 / weight) % radix;
            let cond = conditional_distribution(top, rates, &b, j, beta, u64::MAX)?;
            for (candidate, p) in cond.probabilities.iter().enumerate() {
                let to = from as u64 - digit * weight + candidate as u64 * weight;
                matrix[from][to as usize] += p / n as f64;
            }
        }
    }
    Ok(matrix)
}

/// Conditional law of column `bs` computed from full-network hit rates,
/// `e^{β h(v_j, B_{-j})}` normalised over candidate columns. Independent of
/// the local-energy route used by the sampler.
pub fn conditional_from_full_hit_rate<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    v: &Placement,
    bs: usize,
    beta: f64,
) -> Result<Vec<f64>> {
    top.check_bs(bs)?;
    let exponents: Vec<f64> = KSubsets::all(v.n_contents(), v.cache_size())
        .into_iter()
        .map(|cand| {
            let mut a = v.clone();
            a.overwrite_column(bs, &cand);
            hit_rate_with(top, rates, &a)
        })
        .collect();
    Ok(softmax(&exponents, beta))
}
