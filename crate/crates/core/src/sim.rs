//! The coupled engine: virtual slots on a continuous clock, Poisson requests
//! served by the real caches, periodic snapshots and optional on-line rate
//! learning, plus the metrics extracted from a finished run.
//!
//! Slot update `k >= 1` fires at time `k L` and produces `V(k)`; `V(0)` holds
//! on `[0, L)`. A snapshot at `S_l` copies `V(S_l-)`, so when a boundary
//! coincides with a slot time the snapshot is taken first.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geometry::CellTopology;
use crate::gibbs::{BetaSchedule, GibbsChain, GibbsParams, DEFAULT_COLUMN_LIMIT};
use crate::model::{check_cache_size, hit_rate_with, CacheMatrix, ContentCatalog, Placement};
use crate::oracle::most_popular_placement;
use crate::realcache::{RealState, SnapshotSchedule};
use crate::rng::{substream, Substream};
use crate::traffic::{assign_server, server_probability, RateEstimates, RequestStream};
use crate::{Error, Result};

/// How the learning variant shares observations between BSs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearningMode {
    /// One estimator fed by every arrival.
    Shared,
    /// One estimator per BS, fed only by the requests that BS serves,
    /// reweighted by the inverse of its serving probability. Needs `eta > 0`.
    PerBs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Learning {
    pub mode: LearningMode,
    pub c0: f64,
    pub t0: f64,
}

impl Default for Learning {
    fn default() -> Self {
        Learning {
            mode: LearningMode::Shared,
            c0: 1.0,
            t0: 1.0,
        }
    }
}

/// Optional per-item logs. Change logs and aggregates are always kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Recording {
    pub events: bool,
    pub slots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub topology: CellTopology,
    pub catalog: ContentCatalog,
    pub cache_size: usize,
    pub schedule: BetaSchedule,
    pub snapshots: SnapshotSchedule,
    pub slot_length: f64,
    pub eta: f64,
    /// `None` runs on the true rates.
    pub learning: Option<Learning>,
    /// Simulated continuous time.
    pub horizon: f64,
    /// Starting `V(0)` and `R(0)`; most-popular placement when `None`.
    pub initial: Option<Placement>,
    pub record: Recording,
    /// Width of the bins of the realised hit-count series.
    pub bin_width: Option<f64>,
    pub column_limit: u64,
}

impl SimConfig {
    pub fn new(topology: CellTopology, catalog: ContentCatalog, cache_size: usize, schedule: BetaSchedule) -> Self {
        SimConfig {
            topology,
            catalog,
            cache_size,
            schedule,
            snapshots: SnapshotSchedule::default(),
            slot_length: 1.0,
            eta: 0.0,
            learning: None,
            horizon: 1000.0,
            initial: None,
            record: Recording::default(),
            bin_width: None,
            column_limit: DEFAULT_COLUMN_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_cache_size(self.cache_size, self.catalog.len())?;
        self.schedule.validate()?;
        self.snapshots.validate()?;
        if !(self.slot_length.is_finite() && self.slot_length > 0.0) {
            return Err(Error::InvalidSimulation("slot length must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidSimulation("horizon must be positive"));
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(Error::InvalidProbability {
                value: self.eta,
                range: "[0, 1)",
            });
        }
        if let Some(w) = self.bin_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidSimulation("bin width must be positive"));
            }
        }
        if let Some(learning) = self.learning {
            RateEstimates::new(1, 1, learning.c0, learning.t0)?;
            if learning.mode == LearningMode::PerBs && self.eta <= 0.0 {
                return Err(Error::InvalidSimulation("per-BS learning needs a positive exploration probability"));
            }
        }
        if let Some(p) = &self.initial {
            p.check_dims(self.catalog.len(), self.topology.n_bs())?;
            if p.cache_size() != self.cache_size {
                return Err(Error::InvalidCacheSize {
                    cache_size: p.cache_size(),
                    n_contents: self.catalog.len(),
                });
            }
        }
        Ok(())
    }

    /// Number of virtual updates within the horizon.
    pub fn n_slots(&self) -> u64 {
        libm::floor(self.horizon / self.slot_length) as u64
    }
}

/// One served request.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub content: usize,
    pub segment: usize,
    pub bs: usize,
    pub hit: bool,
    pub stored: bool,
    pub evicted: Vec<usize>,
}

/// One virtual update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    /// The update produced `V(slot)`.
    pub slot: u64,
    pub bs: usize,
    pub beta: f64,
    pub changed: bool,
    /// Interned id of `V(slot)`.
    pub state: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRecord {
    pub epoch: u64,
    pub time: f64,
    /// Index `t` of the copied virtual configuration `V(t)`.
    pub slot: u64,
    pub state: u32,
}

/// Realised traffic within one time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Bin {
    pub requests: u64,
    pub hits: u64,
}

/// Everything recorded by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub seed: u64,
    pub horizon: f64,
    pub slot_length: f64,
    pub n_slots: u64,
    /// Every configuration seen by either cache layer.
    pub states: Vec<CacheMatrix>,
    /// True hit rate of each interned state.
    pub state_hit_rates: Vec<f64>,
    /// `(time, state)` each time `R` changes, starting with `(0, R(0))`.
    pub real_changes: Vec<(f64, u32)>,
    /// `(slot, state)` each time `V` changes, starting with `(0, V(0))`.
    pub virtual_changes: Vec<(u64, u32)>,
    /// Time spent by `R` in each interned state.
    pub occupancy: Vec<f64>,
    pub events: Vec<EventRecord>,
    pub slots: Vec<SlotRecord>,
    pub snapshots: Vec<SnapshotRecord>,
    pub bin_width: f64,
    pub bins: Vec<Bin>,
    pub requests: u64,
    pub hits: u64,
    pub misses: u64,
    /// `∫ h(R(τ)) dτ` over `[0, horizon]`, accumulated at every change of `R`.
    pub hit_integral: f64,
    /// Final estimators: none, one shared, or one per BS.
    pub estimates: Vec<RateEstimates>,
    pub final_virtual: Placement,
    pub final_real: CacheMatrix,
}

struct Interner<'a> {
    top: &'a CellTopology,
    cat: &'a ContentCatalog,
    ids: BTreeMap<CacheMatrix, u32>,
    states: Vec<CacheMatrix>,
    hit_rates: Vec<f64>,
    occupancy: Vec<f64>,
}

impl Interner<'_> {
    fn id(&mut self, m: &CacheMatrix) -> u32 {
        if let Some(&id) = self.ids.get(m) {
            return id;
        }
        let id = self.states.len() as u32;
        self.ids.insert(m.clone(), id);
        self.states.push(m.clone());
        self.hit_rates.push(hit_rate_with(self.top, &self.cat.rates(self.top), m));
        self.occupancy.push(0.0);
        id
    }
}

/// Simulates `config` from `seed`. Deterministic per `(config, seed)`.
pub fn run(config: &SimConfig, seed: u64) -> Result<SimTrace> {
    config.validate()?;
    let top = &config.topology;
    let cat = &config.catalog;
    let n_bs = top.n_bs();
    let rates = cat.rates(top);

    let initial = match &config.initial {
        Some(p) => p.clone(),
        None => most_popular_placement(cat, n_bs, config.cache_size)?,
    };
    let params = GibbsParams {
        schedule: config.schedule,
        seed,
        column_limit: config.column_limit,
    };
    let mut chain = GibbsChain::new(top, initial.clone(), &params)?;
    let mut real = RealState::new(initial.matrix().clone(), initial.clone())?;
    let mut stream = RequestStream::new(top, cat, seed)?;
    let mut server_rng = substream(seed, Substream::ServerPick);
    let mut estimates: Vec<RateEstimates> = match config.learning {
        None => Vec::new(),
        Some(l) => {
            let copies = match l.mode {
                LearningMode::Shared => 1,
                LearningMode::PerBs => n_bs,
            };
            let est = RateEstimates::new(top.segments().len(), cat.len(), l.c0, l.t0)?;
            alloc::vec![est; copies]
        }
    };

    let mut interner = Interner {
        top,
        cat,
        ids: BTreeMap::new(),
        states: Vec::new(),
        hit_rates: Vec::new(),
        occupancy: Vec::new(),
    };
    let n_slots = config.n_slots();
    let horizon = config.horizon;
    let bin_width = config.bin_width.unwrap_or(horizon / 100.0);
    let n_bins = (libm::ceil(horizon / bin_width) as usize).max(1);

    let mut real_id = interner.id(real.cache());
    let mut virtual_id = real_id;
    let mut trace_real = alloc::vec![(0.0, real_id)];
    let mut trace_virtual = alloc::vec![(0u64, virtual_id)];
    let mut events = Vec::new();
    let mut slots = Vec::new();
    let mut snapshots = Vec::new();
    let mut bins = alloc::vec![Bin::default(); n_bins];
    let (mut requests, mut hits) = (0u64, 0u64);
    let mut hit_integral = 0.0;
    let mut last_change = 0.0;

    let mut boundaries = config.snapshots.boundaries();
    let mut next_snapshot = boundaries.next().expect("boundaries never end");
    let mut next_slot = 1u64;
    let mut request = stream.next_request(0.0);

    loop {
        let slot_time = if next_slot <= n_slots {
            next_slot as f64 * config.slot_length
        } else {
            f64::INFINITY
        };
        let snap_time = next_snapshot.1;
        if snap_time <= slot_time && snap_time <= request.time {
            if snap_time > horizon {
                break;
            }
            real.refresh_snapshot(chain.placement(), next_snapshot.0);
            snapshots.push(SnapshotRecord {
                epoch: next_snapshot.0,
                time: snap_time,
                slot: chain.slot(),
                state: virtual_id,
            });
            next_snapshot = boundaries.next().expect("boundaries never end");
        } else if slot_time <= request.time {
            if slot_time > horizon {
                break;
            }
            let bs = chain.pick_bs();
            let record = match config.learning.map(|l| l.mode) {
                None => chain.resample(&rates, bs),
                Some(mode) => {
                    let est = match mode {
                        LearningMode::Shared => &mut estimates[0],
                        LearningMode::PerBs => &mut estimates[bs],
                    };
                    est.advance(slot_time)?;
                    chain.resample(&*est, bs)
                }
            };
            if record.changed {
                virtual_id = interner.id(chain.placement());
                trace_virtual.push((record.slot, virtual_id));
            }
            if config.record.slots {
                slots.push(SlotRecord {
                    slot: record.slot,
                    bs: record.bs,
                    beta: record.beta,
                    changed: record.changed,
                    state: virtual_id,
                });
            }
            next_slot += 1;
        } else {
            let now = request.time;
            if now > horizon {
                break;
            }
            let choice = assign_server(&request, real.cache(), &mut server_rng, config.eta);
            if let Some(l) = config.learning {
                match l.mode {
                    LearningMode::Shared => estimates[0].observe(&request, now)?,
                    LearningMode::PerBs => {
                        let holders = real.cache().holders(request.content, request.members);
                        let p = server_probability(request.members, holders, choice.bs, config.eta);
                        estimates[choice.bs].observe_weighted(request.content, request.segment, 1.0 / p, now)?;
                    }
                }
            }
            let outcome = real.on_request(request.content, choice.bs);
            requests += 1;
            let bin = ((now / bin_width) as usize).min(n_bins - 1);
            bins[bin].requests += 1;
            if outcome.hit {
                hits += 1;
                bins[bin].hits += 1;
            }
            if outcome.changed() {
                let span = now - last_change;
                hit_integral += span * interner.hit_rates[real_id as usize];
                interner.occupancy[real_id as usize] += span;
                last_change = now;
                real_id = interner.id(real.cache());
                trace_real.push((now, real_id));
            }
            if config.record.events {
                events.push(EventRecord {
                    time: now,
                    content: request.content,
                    segment: request.segment,
                    bs: choice.bs,
                    hit: outcome.hit,
                    stored: outcome.stored,
                    evicted: outcome.evicted,
                });
            }
            request = stream.next_request(now);
        }
    }
    let span = horizon - last_change;
    hit_integral += span * interner.hit_rates[real_id as usize];
    interner.occupancy[real_id as usize] += span;
    for est in estimates.iter_mut() {
        est.advance(horizon)?;
    }

    Ok(SimTrace {
        seed,
        horizon,
        slot_length: config.slot_length,
        n_slots,
        states: interner.states,
        state_hit_rates: interner.hit_rates,
        real_changes: trace_real,
        virtual_changes: trace_virtual,
        occupancy: interner.occupancy,
        events,
        slots,
        snapshots,
        bin_width,
        bins,
        requests,
        hits,
        misses: requests - hits,
        hit_integral,
        estimates,
        final_virtual: chain.placement().clone(),
        final_real: real.cache().clone(),
    })
}

/// A distribution over configurations.
pub type Distribution = BTreeMap<CacheMatrix, f64>;

/// Total time `R` spent in each configuration.
pub fn occupancy_times(trace: &SimTrace) -> Distribution {
    let mut out = Distribution::new();
    for (id, &t) in trace.occupancy.iter().enumerate() {
        if t > 0.0 {
            *out.entry(trace.states[id].clone()).or_default() += t;
        }
    }
    out
}

/// Fraction of `[from, to)` spent by `R` in each configuration.
pub fn real_occupancy(trace: &SimTrace, from: f64, to: f64) -> Result<Distribution> {
    let to = to.min(trace.horizon);
    if !(from >= 0.0 && to > from) {
        return Err(Error::EmptyWindow);
    }
    let mut times: BTreeMap<u32, f64> = BTreeMap::new();
    for (k, &(start, id)) in trace.real_changes.iter().enumerate() {
        let end = trace.real_changes.get(k + 1).map_or(trace.horizon, |c| c.0);
        let overlap = end.min(to) - start.max(from);
        if overlap > 0.0 {
            *times.entry(id).or_default() += overlap;
        }
    }
    let width = to - from;
    Ok(times
        .into_iter()
        .map(|(id, t)| (trace.states[id as usize].clone(), t / width))
        .collect())
}

/// Real-cache occupancy fractions after discarding the first
/// `burn_in_fraction` of the horizon.
pub fn empirical_distribution(trace: &SimTrace, burn_in_fraction: f64) -> Result<Distribution> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::InvalidProbability {
            value: burn_in_fraction,
            range: "[0, 1)",
        });
    }
    real_occupancy(trace, burn_in_fraction * trace.horizon, trace.horizon)
}

/// Time average of `h(R(τ))` over `[from, to)`, with the true rates.
pub fn time_average_hit_rate(trace: &SimTrace, from: f64, to: f64) -> Result<f64> {
    Ok(real_occupancy(trace, from, to)?
        .iter()
        .map(|(m, p)| {
            let id = trace.states.iter().position(|s| s == m).expect("interned");
            p * trace.state_hit_rates[id]
        })
        .sum())
}

/// Virtual state id of `V(slot)`.
pub fn virtual_state_at(trace: &SimTrace, slot: u64) -> u32 {
    let k = trace.virtual_changes.partition_point(|&(s, _)| s <= slot);
    trace.virtual_changes[k - 1].1
}

/// Fraction of slots `t ∈ [from, to)` with `V(t) = state` for each state.
pub fn virtual_distribution(trace: &SimTrace, from: u64, to: u64) -> Result<Distribution> {
    let to = to.min(trace.n_slots + 1);
    if to <= from {
        return Err(Error::EmptyWindow);
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for (k, &(start, id)) in trace.virtual_changes.iter().enumerate() {
        let end = trace.virtual_changes.get(k + 1).map_or(trace.n_slots + 1, |c| c.0);
        let lo = start.max(from);
        let hi = end.min(to);
        if hi > lo {
            *counts.entry(id).or_default() += hi - lo;
        }
    }
    let width = (to - from) as f64;
    Ok(counts
        .into_iter()
        .map(|(id, c)| (trace.states[id as usize].clone(), c as f64 / width))
        .collect())
}

/// Probability mass a distribution puts on `targets`.
pub fn mass_on<'a, I>(dist: &Distribution, targets: I) -> f64
where
    I: IntoIterator<Item = &'a CacheMatrix>,
{
    targets.into_iter().filter_map(|t| dist.get(t)).sum()
}

/// `½ Σ |p − q|`; both arguments must sum to 1 within `1e-9`.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    for d in [p, q] {
        let sum: f64 = d.values().sum();
        if (sum - 1.0).abs() > 1e-9 || d.values().any(|&x| x < 0.0) {
            return Err(Error::NotNormalized { sum });
        }
    }
    let mut total = 0.0;
    for (k, a) in p {
        total += (a - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, b) in q {
        if !p.contains_key(k) {
            total += b;
        }
    }
    Ok((0.5 * total).min(1.0))
}
