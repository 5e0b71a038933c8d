//! Exhaustive optimisation over all placements, plus the two baselines
//! (most-popular everywhere, independent per-BS placement).

use alloc::vec::Vec;

use crate::geometry::CellTopology;
use crate::model::{check_cache_size, hit_rate_with, ContentCatalog, Placement, SegmentRates};
use crate::subsets::PlacementSpace;
use crate::{Error, Result};

/// Placements within this relative distance of the maximum are tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumReport {
    pub argmax: Vec<Placement>,
    pub h_max: f64,
    pub h_min: f64,
    pub delta: f64,
    pub evaluated: u64,
}

impl OptimumReport {
    pub fn is_unique(&self) -> bool {
        self.argmax.len() == 1
    }

    pub fn contains_optimum(&self, p: &Placement) -> bool {
        self.argmax.iter().any(|b| b == p)
    }

    /// Combines reports over disjoint parts of the placement space.
    pub fn merge(mut self, other: OptimumReport) -> OptimumReport {
        let h_max = self.h_max.max(other.h_max);
        let tied = |h: f64| h >= h_max - TIE_TOLERANCE * h_max.abs().max(1.0);
        let mut argmax = Vec::new();
        if tied(self.h_max) {
            argmax.append(&mut self.argmax);
        }
        if tied(other.h_max) {
            argmax.extend(other.argmax);
        }
        argmax.sort();
        let h_min = self.h_min.min(other.h_min);
        OptimumReport {
            argmax,
            h_max,
            h_min,
            delta: h_max - h_min,
            evaluated: self.evaluated + other.evaluated,
        }
    }
}

/// Scans every feasible placement.
pub fn enumerate_optimal(top: &CellTopology, cat: &ContentCatalog, cache_size: usize, limit: u64) -> Result<OptimumReport> {
    let space = PlacementSpace::new(cat.len(), top.n_bs(), cache_size, limit)?;
    Ok(enumerate_range(top, &cat.rates(top), &space, 0..space.len()))
}

/// Scans placements with space indices in `range`; streaming, so memory is
/// bounded by the tie set.
pub fn enumerate_range<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    space: &PlacementSpace,
    range: core::ops::Range<u64>,
) -> OptimumReport {
    let mut report = OptimumReport {
        argmax: Vec::new(),
        h_max: f64::NEG_INFINITY,
        h_min: f64::INFINITY,
        delta: 0.0,
        evaluated: 0,
    };
    for idx in range {
        let p = space.placement(idx);
        let h = hit_rate_with(top, rates, &p);
        report.evaluated += 1;
        report.h_min = report.h_min.min(h);
        let tol = TIE_TOLERANCE * report.h_max.abs().max(1.0);
        if h > report.h_max + tol {
            report.h_max = h;
            report.argmax.clear();
            report.argmax.push(p);
        } else if h >= report.h_max - tol {
            report.h_max = report.h_max.max(h);
            report.argmax.push(p);
        }
    }
    report.delta = report.h_max - report.h_min;
    report.argmax.sort();
    report
}

/// Every BS holds the `cache_size` most popular contents (ties to the lower index).
pub fn most_popular_placement(cat: &ContentCatalog, n_bs: usize, cache_size: usize) -> Result<Placement> {
    check_cache_size(cache_size, cat.len())?;
    let mut order: Vec<usize> = (0..cat.len()).collect();
    order.sort_by(|&a, &b| cat.intensity(b).total_cmp(&cat.intensity(a)).then(a.cmp(&b)));
    order.truncate(cache_size);
    order.sort_unstable();
    Placement::uniform(cat.len(), n_bs, &order)
}

/// Expected hit rate when BS `j` stores content `i` with marginal
/// probability `q[i][j]`, independently across BSs.
pub fn independent_hit_rate(top: &CellTopology, cat: &ContentCatalog, q: &[Vec<f64>]) -> Result<f64> {
    if q.len() != cat.len() || q.iter().any(|row| row.len() != top.n_bs()) {
        return Err(Error::DimensionMismatch {
            expected_contents: cat.len(),
            expected_bs: top.n_bs(),
            contents: q.len(),
            bs: q.first().map_or(0, Vec::len),
        });
    }
    for &v in q.iter().flatten() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidProbability {
                value: v,
                range: "[0, 1]",
            });
        }
    }
    let mut total = 0.0;
    for seg in top.segments() {
        for (i, row) in q.iter().enumerate() {
            let miss: f64 = seg.members.iter().map(|j| 1.0 - row[j]).product();
            total += seg.area * cat.intensity(i) * (1.0 - miss);
        }
    }
    Ok(total)
}

/// Best independent placement that uses the same marginals at every BS.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentOptimum {
    /// Per-content storage probability, summing to the cache size.
    pub marginals: Vec<f64>,
    pub hit_rate: f64,
}

/// Maximises the (concave) expected hit rate of shared-marginal independent
/// placement over `{q : Σ q_i = K, 0 <= q_i <= 1}` by conditional gradient
/// with exact line search.
pub fn optimize_independent(top: &CellTopology, cat: &ContentCatalog, cache_size: usize) -> Result<IndependentOptimum> {
    check_cache_size(cache_size, cat.len())?;
    let m = cat.len();
    let objective = |q: &[f64]| -> f64 {
        let mut total = 0.0;
        for seg in top.segments() {
            let n = seg.members.len() as i32;
            for (i, &qi) in q.iter().enumerate() {
                total += seg.area * cat.intensity(i) * (1.0 - libm::pow(1.0 - qi, n as f64));
            }
        }
        total
    };
    let gradient = |q: &[f64]| -> Vec<f64> {
        let mut g = alloc::vec![0.0; m];
        for seg in top.segments() {
            let n = seg.members.len() as f64;
            for (i, &qi) in q.iter().enumerate() {
                g[i] += seg.area * cat.intensity(i) * n * libm::pow(1.0 - qi, n - 1.0);
            }
        }
        g
    };

    let mut q = alloc::vec![cache_size as f64 / m as f64; m];
    let mut value = objective(&q);
    for _ in 0..2000 {
        let g = gradient(&q);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
        let mut vertex = alloc::vec![0.0; m];
        for &i in &order[..cache_size] {
            vertex[i] = 1.0;
        }
        let direction: Vec<f64> = vertex.iter().zip(&q).map(|(v, x)| v - x).collect();
        let slope: f64 = direction.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope <= 1e-15 {
            break;
        }
        let along = |step: f64| -> f64 {
            let x: Vec<f64> = q.iter().zip(&direction).map(|(x, d)| x + step * d).collect();
            objective(&x)
        };
        let step = golden_section_max(along, 0.0, 1.0, 1e-13);
        for (x, d) in q.iter_mut().zip(&direction) {
            *x = (*x + step * d).clamp(0.0, 1.0);
        }
        let next = objective(&q);
        if next - value <= 1e-16 {
            value = value.max(next);
            break;
        }
        value = next;
    }
    Ok(IndependentOptimum {
        marginals: q,
        hit_rate: value,
    })
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        }
    }
    let mid = 0.5 * (lo + hi);
    // endpoints matter when the optimum sits on the boundary of the segment
    [lo, mid, hi, 0.0, 1.0]
        .into_iter()
        .fold((mid, f(mid)), |best, x| {
            let fx = f(x);
            if fx > best.1 {
                (x, fx)
            } else {
                best
            }
        })
        .0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BsSet;

    fn sec6() -> (CellTopology, ContentCatalog) {
        (
            CellTopology::from_intervals(&[(0.0, 6.0), (1.0, 10.0)]).unwrap(),
            ContentCatalog::from_popularities(0.1, &[0.55, 0.45]).unwrap(),
        )
    }

    #[test]
    fn sec6_optimum() {
        let (top, cat) = sec6();
        let r = enumerate_optimal(&top, &cat, 1, 1000).unwrap();
        let best = Placement::from_columns(2, 1, &[alloc::vec![1], alloc::vec![0]]).unwrap();
        assert_eq!(r.argmax, [best]);
        assert!((r.h_max - 0.765).abs() < 1e-9);
        assert!((r.h_min - 0.45).abs() < 1e-9);
        assert!((r.delta - 0.315).abs() < 1e-9);
        assert_eq!(r.evaluated, 4);
    }

    #[test]
    fn disjoint_cells_want_most_popular() {
        let top = CellTopology::from_intervals(&[(0.0, 1.0), (2.0, 5.0)]).unwrap();
        let cat = ContentCatalog::new(alloc::vec![0.2, 0.5, 0.3]).unwrap();
        let r = enumerate_optimal(&top, &cat, 2, 1000).unwrap();
        assert_eq!(r.argmax, [most_popular_placement(&cat, 2, 2).unwrap()]);
    }

    #[test]
    fn single_bs_top_k() {
        let top = CellTopology::from_intervals(&[(0.0, 1.0)]).unwrap();
        let cat = ContentCatalog::new(alloc::vec![0.1, 0.4, 0.2, 0.3]).unwrap();
        let r = enumerate_optimal(&top, &cat, 2, 1000).unwrap();
        assert_eq!(r.argmax, [Placement::from_columns(4, 2, &[alloc::vec![1, 3]]).unwrap()]);
    }

    #[test]
    fn ties_are_all_reported() {
        let top = CellTopology::from_segments(2, [(BsSet::singleton(0), 1.0), (BsSet::singleton(1), 1.0)]).unwrap();
        let cat = ContentCatalog::new(alloc::vec![1.0, 1.0]).unwrap();
        let r = enumerate_optimal(&top, &cat, 1, 100).unwrap();
        assert_eq!(r.argmax.len(), 4);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn merge_matches_full_scan() {
        let top = CellTopology::from_intervals(&[(0.0, 3.0), (1.0, 5.0), (4.0, 9.0)]).unwrap();
        let cat = ContentCatalog::new(alloc::vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let space = PlacementSpace::new(4, 3, 2, 10_000).unwrap();
        let rates = cat.rates(&top);
        let full = enumerate_range(&top, &rates, &space, 0..space.len());
        let half = space.len() / 2;
        let merged = enumerate_range(&top, &rates, &space, 0..half)
            .merge(enumerate_range(&top, &rates, &space, half..space.len()));
        assert_eq!(merged, full);
    }

    #[test]
    fn capacity_limit() {
        let top = CellTopology::from_intervals(&[(0.0, 1.0), (0.5, 2.0), (1.5, 3.0)]).unwrap();
        let cat = ContentCatalog::new(alloc::vec![1.0; 20]).unwrap();
        assert!(matches!(enumerate_optimal(&top, &cat, 5, 1_000_000), Err(Error::Capacity { .. })));
    }

    #[test]
    fn most_popular_baselines() {
        let (top, cat) = sec6();
        let p = most_popular_placement(&cat, 2, 1).unwrap();
        assert_eq!(p, Placement::uniform(2, 2, &[0]).unwrap());
        assert!((crate::model::hit_rate(&top, &cat, &p).unwrap() - 0.55).abs() < 1e-9);

        let flat = ContentCatalog::new(alloc::vec![1.0; 3]).unwrap();
        assert_eq!(most_popular_placement(&flat, 2, 2).unwrap(), Placement::uniform(3, 2, &[0, 1]).unwrap());

        let skewed = ContentCatalog::new(alloc::vec![0.3, 0.1, 0.4, 0.2]).unwrap();
        assert_eq!(
            most_popular_placement(&skewed, 1, 3).unwrap(),
            Placement::uniform(4, 1, &[0, 2, 3]).unwrap()
        );
    }

    /// The two-content mixture where both BSs store content 1 with probability r.
    fn sec6_mixture(r: f64) -> f64 {
        0.55 * r * r + 0.45 * (1.0 - r) * (1.0 - r) + r * (1.0 - r) * 0.735 + (1.0 - r) * r * 0.765
    }

    #[test]
    fn sec6_independent_grid() {
        let (top, cat) = sec6();
        let mut best = (0.0, f64::NEG_INFINITY);
        for step in 0..=10_000 {
            let r = step as f64 * 1e-4;
            let h = independent_hit_rate(&top, &cat, &[alloc::vec![r, r], alloc::vec![1.0 - r, 1.0 - r]]).unwrap();
            assert!((h - sec6_mixture(r)).abs() < 1e-12);
            if h > best.1 {
                best = (r, h);
            }
        }
        assert!((best.0 - 0.6).abs() < 1e-9);
        assert!((best.1 - 0.63).abs() < 1e-9);
    }

    #[test]
    fn sec6_independent_optimizer() {
        let (top, cat) = sec6();
        let opt = optimize_independent(&top, &cat, 1).unwrap();
        assert!((opt.hit_rate - 0.63).abs() < 1e-9);
        assert!((opt.marginals[0] - 0.6).abs() < 1e-6);
    }

    #[test]
    fn independent_degenerate_cases() {
        let (top, cat) = sec6();
        let zero = independent_hit_rate(&top, &cat, &[alloc::vec![0.0; 2], alloc::vec![0.0; 2]]).unwrap();
        assert_eq!(zero, 0.0);
        let p = Placement::from_columns(2, 1, &[alloc::vec![1], alloc::vec![0]]).unwrap();
        let q: Vec<Vec<f64>> = p.to_rows().iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let h = independent_hit_rate(&top, &cat, &q).unwrap();
        assert!((h - crate::model::hit_rate(&top, &cat, &p).unwrap()).abs() < 1e-12);
        assert!(independent_hit_rate(&top, &cat, &[alloc::vec![1.5, 0.0], alloc::vec![0.0, 0.0]]).is_err());
    }
}
