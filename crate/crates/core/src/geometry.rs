//! Coverage structure of a set of base stations.
//!
//! Only the area of each coverage segment matters downstream, so the
//! topology is stored as a measure over segments: a segment is the region
//! covered by exactly one subset of base stations. Base stations are
//! 0-based here; file formats and CLI output use 1-based numbering.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported number of base stations (segment keys are bitmasks).
pub const MAX_BS: usize = 64;

/// Default cap on the number of stored positive-area segments.
pub const DEFAULT_SEGMENT_LIMIT: usize = 1 << 16;

/// A set of base stations, stored as a bitmask over 0-based indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BsSet(u64);

impl BsSet {
    pub const EMPTY: BsSet = BsSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        BsSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(bs: usize) -> Self {
        debug_assert!(bs < MAX_BS);
        BsSet(1 << bs)
    }

    pub fn contains(self, bs: usize) -> bool {
        bs < MAX_BS && self.0 & (1 << bs) != 0
    }

    pub fn insert(&mut self, bs: usize) {
        debug_assert!(bs < MAX_BS);
        self.0 |= 1 << bs;
    }

    pub fn union(self, other: BsSet) -> BsSet {
        BsSet(self.0 | other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Highest member index plus one (0 for the empty set).
    pub fn span(self) -> usize {
        (64 - self.0.leading_zeros()) as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let low = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(low)
            }
        })
    }
}

impl FromIterator<usize> for BsSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = BsSet::EMPTY;
        for bs in iter {
            set.insert(bs);
        }
        set
    }
}

impl fmt::Debug for BsSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A positive-area coverage segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub members: BsSet,
    pub area: f64,
}

/// Immutable segment measure over `n_bs` base stations.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTopology {
    n_bs: usize,
    segments: Vec<Segment>,
    total_area: f64,
    neighbors: Vec<BsSet>,
    by_bs: Vec<Vec<usize>>,
}

impl CellTopology {
    /// Builds a topology directly from a segment measure. Zero-area
    /// segments are dropped.
    pub fn from_segments<I>(n_bs: usize, areas: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BsSet, f64)>,
    {
        Self::from_segments_with_limit(n_bs, areas, DEFAULT_SEGMENT_LIMIT)
    }

    pub fn from_segments_with_limit<I>(n_bs: usize, areas: I, limit: usize) -> Result<Self>
    where
        I: IntoIterator<Item = (BsSet, f64)>,
    {
        if n_bs == 0 || n_bs > MAX_BS {
            return Err(Error::InvalidBsCount { n_bs, max: MAX_BS });
        }
        let mut measure = BTreeMap::new();
        for (members, area) in areas {
            if members.is_empty() {
                return Err(Error::EmptySegment);
            }
            if members.span() > n_bs {
                return Err(Error::BsOutOfRange {
                    bs: members.span() - 1,
                    n_bs,
                });
            }
            if !area.is_finite() || area < 0.0 {
                return Err(Error::InvalidArea { area });
            }
            if measure.insert(members, area).is_some() {
                return Err(Error::DuplicateSegment {
                    bits: members.bits(),
                });
            }
        }
        let segments: Vec<Segment> = measure
            .into_iter()
            .filter(|&(_, area)| area > 0.0)
            .map(|(members, area)| Segment { members, area })
            .collect();
        if segments.len() > limit {
            return Err(Error::TooManySegments {
                count: segments.len(),
                limit,
            });
        }

        let total_area = segments.iter().map(|s| s.area).sum();
        let mut neighbors: Vec<BsSet> = (0..n_bs).map(BsSet::singleton).collect();
        let mut by_bs = alloc::vec![Vec::new(); n_bs];
        for (idx, seg) in segments.iter().enumerate() {
            for j in seg.members.iter() {
                neighbors[j] = neighbors[j].union(seg.members);
                by_bs[j].push(idx);
            }
        }
        Ok(CellTopology {
            n_bs,
            segments,
            total_area,
            neighbors,
            by_bs,
        })
    }

    /// Exact 1-D topology from one `(lo, hi)` interval per base station.
    pub fn from_intervals(intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::NoIntervals);
        }
        if intervals.len() > MAX_BS {
            return Err(Error::InvalidBsCount {
                n_bs: intervals.len(),
                max: MAX_BS,
            });
        }
        for (index, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidInterval { index, lo, hi });
            }
        }

        let mut cuts: Vec<f64> = intervals.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut measure: BTreeMap<BsSet, f64> = BTreeMap::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let cover: BsSet = intervals
                .iter()
                .enumerate()
                .filter(|(_, &(lo, hi))| lo <= a && hi >= b)
                .map(|(j, _)| j)
                .collect();
            if !cover.is_empty() {
                *measure.entry(cover).or_insert(0.0) += b - a;
            }
        }
        Self::from_segments(intervals.len(), measure)
    }

    /// Grid approximation of a 2-D topology made of discs.
    ///
    /// Each grid cell of side `grid_step` is assigned to the discs that
    /// contain its center. The area error is O(grid_step x total perimeter).
    pub fn from_discs(centers: &[(f64, f64)], radii: &[f64], grid_step: f64) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::DiscCountMismatch {
                centers: centers.len(),
                radii: radii.len(),
            });
        }
        if centers.is_empty() || centers.len() > MAX_BS {
            return Err(Error::InvalidBsCount {
                n_bs: centers.len(),
                max: MAX_BS,
            });
        }
        for (index, &radius) in radii.iter().enumerate() {
            if !(radius.is_finite() && radius > 0.0) {
                return Err(Error::InvalidRadius { index, radius });
            }
        }
        if !(grid_step.is_finite() && grid_step > 0.0) {
            return Err(Error::InvalidGridStep { step: grid_step });
        }

        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (&(cx, cy), &r) in centers.iter().zip(radii) {
            x0 = x0.min(cx - r);
            y0 = y0.min(cy - r);
            x1 = x1.max(cx + r);
            y1 = y1.max(cy + r);
        }
        // cells are aligned to the global lattice with a corner at the origin
        x0 = libm::floor(x0 / grid_step) * grid_step;
        y0 = libm::floor(y0 / grid_step) * grid_step;
        let nx = libm::ceil((x1 - x0) / grid_step) as u64;
        let ny = libm::ceil((y1 - y0) / grid_step) as u64;

        let mut counts: BTreeMap<BsSet, u64> = BTreeMap::new();
        let mut row_members = Vec::with_capacity(centers.len());
        for iy in 0..ny {
            let y = y0 + (iy as f64 + 0.5) * grid_step;
            // only discs whose vertical extent reaches this row
            row_members.clear();
            row_members.extend(
                centers
                    .iter()
                    .zip(radii)
                    .enumerate()
                    .filter(|(_, (&(_, cy), &r))| (y - cy).abs() <= r)
                    .map(|(j, (&(cx, cy), &r))| (j, cx, (y - cy) * (y - cy), r * r)),
            );
            if row_members.is_empty() {
                continue;
            }
            for ix in 0..nx {
                let x = x0 + (ix as f64 + 0.5) * grid_step;
                let mut cover = BsSet::EMPTY;
                for &(j, cx, dy2, r2) in &row_members {
                    let dx = x - cx;
                    if dx * dx + dy2 <= r2 {
                        cover.insert(j);
                    }
                }
                if !cover.is_empty() {
                    *counts.entry(cover).or_insert(0) += 1;
                }
            }
        }
        let cell = grid_step * grid_step;
        Self::from_segments(
            centers.len(),
            counts.into_iter().map(|(s, c)| (s, c as f64 * cell)),
        )
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Positive-area segments in increasing bitmask order.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, idx: usize) -> &Segment {
        &self.segments[idx]
    }

    pub fn segment_index(&self, members: BsSet) -> Option<usize> {
        self.segments
            .binary_search_by(|s| s.members.cmp(&members))
            .ok()
    }

    /// Area of the segment covered by exactly `members` (0 if not stored).
    pub fn area(&self, members: BsSet) -> f64 {
        self.segment_index(members)
            .map_or(0.0, |idx| self.segments[idx].area)
    }

    pub fn check_bs(&self, bs: usize) -> Result<()> {
        if bs < self.n_bs {
            Ok(())
        } else {
            Err(Error::BsOutOfRange {
                bs,
                n_bs: self.n_bs,
            })
        }
    }

    /// Base stations whose cells intersect the cell of `bs`, including `bs`.
    pub fn neighbors(&self, bs: usize) -> Result<BsSet> {
        self.check_bs(bs)?;
        Ok(self.neighbors[bs])
    }

    /// Positive-area segments covered by `bs`.
    pub fn segments_containing(&self, bs: usize) -> Result<impl Iterator<Item = &Segment> + '_> {
        self.check_bs(bs)?;
        Ok(self.by_bs[bs].iter().map(move |&idx| &self.segments[idx]))
    }

    /// Indices (into [`segments`](Self::segments)) of segments covered by `bs`.
    pub fn segment_indices_containing(&self, bs: usize) -> &[usize] {
        &self.by_bs[bs]
    }

    /// Whether `bs` has a positive-area region covered by no other BS.
    pub fn has_exclusive_region(&self, bs: usize) -> bool {
        self.area(BsSet::singleton(bs)) > 0.0
    }

    /// Base stations without an exclusive region.
    pub fn without_exclusive_region(&self) -> Vec<usize> {
        (0..self.n_bs)
            .filter(|&j| !self.has_exclusive_region(j))
            .collect()
    }
}
