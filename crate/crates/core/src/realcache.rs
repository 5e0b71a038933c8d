//! Request-driven updates of the serving (real) caches.
//!
//! Real caches never fetch on their own. On a miss the serving BS downloads
//! the content and keeps it only if its virtual column held it at the last
//! snapshot boundary; in that case every content absent from the snapshot
//! column is evicted.

use alloc::vec::Vec;

use crate::model::{CacheMatrix, Placement};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `T_k = T₁ k`
    Linear,
    /// `T_k = T₁ r^{k-1}` with `r > 1`
    Geometric { ratio: f64 },
}

/// Epoch lengths `T_1 < T_2 < ...` and their prefix sums `S_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotSchedule {
    pub first: f64,
    pub growth: Growth,
}

impl Default for SnapshotSchedule {
    fn default() -> Self {
        SnapshotSchedule {
            first: 10.0,
            growth: Growth::Linear,
        }
    }
}

impl SnapshotSchedule {
    pub fn linear(first: f64) -> Self {
        SnapshotSchedule {
            first,
            growth: Growth::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.first.is_finite() && self.first > 0.0) {
            return Err(Error::InvalidSchedule("first epoch length must be positive"));
        }
        if let Growth::Geometric { ratio } = self.growth {
            if !(ratio.is_finite() && ratio > 1.0) {
                return Err(Error::InvalidSchedule("geometric ratio must exceed 1"));
            }
        }
        Ok(())
    }

    /// Length `T_k` of epoch `k >= 1`.
    pub fn epoch_length(&self, k: u64) -> f64 {
        match self.growth {
            Growth::Linear => self.first * k as f64,
            Growth::Geometric { ratio } => self.first * libm::pow(ratio, (k - 1) as f64),
        }
    }

    pub fn boundaries(&self) -> Boundaries {
        Boundaries {
            schedule: *self,
            index: 0,
            position: 0.0,
        }
    }

    /// `(κ(τ), ζ(τ))`: the number of boundaries `S_l <= τ` and the last of them
    /// (0 when there is none).
    pub fn kappa_zeta(&self, tau: f64) -> (u64, f64) {
        let mut b = self.boundaries();
        let mut last = (0, 0.0);
        while let Some((l, s)) = b.next() {
            if s > tau {
                break;
            }
            last = (l, s);
        }
        last
    }
}

/// Iterator over `(l, S_l)` for `l = 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct Boundaries {
    schedule: SnapshotSchedule,
    index: u64,
    position: f64,
}

impl Iterator for Boundaries {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        self.index += 1;
        self.position += self.schedule.epoch_length(self.index);
        Some((self.index, self.position))
    }
}

/// What a request did to the real cache of its serving BS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestOutcome {
    pub hit: bool,
    pub stored: bool,
    pub evicted: Vec<usize>,
}

impl RequestOutcome {
    pub fn changed(&self) -> bool {
        self.stored || !self.evicted.is_empty()
    }
}

/// Real caches plus the virtual snapshot they follow.
#[derive(Debug, Clone, PartialEq)]
pub struct RealState {
    cache: CacheMatrix,
    capacity: usize,
    snapshot: Placement,
    epoch: u64,
}

impl RealState {
    /// `initial` must respect the snapshot's dimensions and hold at most
    /// `cache_size` contents per column.
    pub fn new(initial: CacheMatrix, snapshot: Placement) -> Result<Self> {
        initial.check_dims(snapshot.n_contents(), snapshot.n_bs())?;
        let capacity = snapshot.cache_size();
        for j in 0..initial.n_bs() {
            let found = initial.column_len(j);
            if found > capacity {
                return Err(Error::ColumnSum {
                    bs: j,
                    found,
                    expected: capacity,
                });
            }
        }
        Ok(RealState {
            cache: initial,
            capacity,
            snapshot,
            epoch: 0,
        })
    }

    pub fn cache(&self) -> &CacheMatrix {
        &self.cache
    }

    pub fn snapshot(&self) -> &Placement {
        &self.snapshot
    }

    /// Index `l` of the boundary `S_l` the snapshot was taken at (0 = initial).
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Serves a request for `content` at `bs`.
    pub fn on_request(&mut self, content: usize, bs: usize) -> RequestOutcome {
        if self.cache.holds(content, bs) {
            return RequestOutcome {
                hit: true,
                stored: false,
                evicted: Vec::new(),
            };
        }
        if !self.snapshot.holds(content, bs) {
            return RequestOutcome {
                hit: false,
                stored: false,
                evicted: Vec::new(),
            };
        }
        let evicted: Vec<usize> = (0..self.cache.n_contents())
            .filter(|&k| k != content && self.cache.holds(k, bs) && !self.snapshot.holds(k, bs))
            .collect();
        for &k in &evicted {
            self.cache.set(k, bs, false);
        }
        self.cache.set(content, bs, true);
        debug_assert!(self.cache.column_len(bs) <= self.capacity);
        RequestOutcome {
            hit: false,
            stored: true,
            evicted,
        }
    }

    /// Replaces the reference snapshot with `virtual_placement`, taken at
    /// boundary `epoch`. The real caches are untouched.
    pub fn refresh_snapshot(&mut self, virtual_placement: &Placement, epoch: u64) {
        self.snapshot.clone_from(virtual_placement);
        self.epoch = epoch;
    }
}
