//! Poisson request generation, serving-BS selection and on-line rate
//! estimation.
//!
//! A marked space-time Poisson process restricted to segment identity
//! factorises into exponential inter-arrivals at rate `λ |C|`, an
//! independent content mark with law `λ_i / λ` and an independent segment
//! mark with law `|C(s)| / |C|`. Arrival coordinates are never drawn.

use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::geometry::{BsSet, CellTopology};
use crate::model::{CacheMatrix, ContentCatalog, SegmentRates};
use crate::rng::{substream, StreamRng, Substream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestEvent {
    pub time: f64,
    pub content: usize,
    /// Index into the topology's segment list.
    pub segment: usize,
    pub members: BsSet,
}

/// Request stream over one topology and catalog.
#[derive(Debug, Clone)]
pub struct RequestStream {
    total_rate: f64,
    segments: Vec<BsSet>,
    content_mark: WeightedIndex<f64>,
    segment_mark: WeightedIndex<f64>,
    arrivals: StreamRng,
    content_rng: StreamRng,
    segment_rng: StreamRng,
}

impl RequestStream {
    pub fn new(top: &CellTopology, cat: &ContentCatalog, seed: u64) -> Result<Self> {
        let total_rate = cat.total_intensity() * top.total_area();
        if !(total_rate > 0.0) {
            return Err(Error::ZeroTraffic);
        }
        let content_mark = WeightedIndex::new(cat.intensities()).map_err(|_| Error::ZeroTraffic)?;
        let segment_mark =
            WeightedIndex::new(top.segments().iter().map(|s| s.area)).map_err(|_| Error::ZeroTraffic)?;
        Ok(RequestStream {
            total_rate,
            segments: top.segments().iter().map(|s| s.members).collect(),
            content_mark,
            segment_mark,
            arrivals: substream(seed, Substream::Arrivals),
            content_rng: substream(seed, Substream::ContentMark),
            segment_rng: substream(seed, Substream::SegmentMark),
        })
    }

    /// Requests per unit time over the whole region.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// The first request strictly after `now`.
    pub fn next_request(&mut self, now: f64) -> RequestEvent {
        let u: f64 = self.arrivals.gen();
        let gap = -libm::log1p(-u) / self.total_rate;
        let segment = self.segment_mark.sample(&mut self.segment_rng);
        RequestEvent {
            time: now + gap,
            content: self.content_mark.sample(&mut self.content_rng),
            segment,
            members: self.segments[segment],
        }
    }
}

/// The serving BS and the probability it had of being chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServerChoice {
    pub bs: usize,
    pub probability: f64,
}

/// Routes a request: with probability `eta`, or whenever no covering BS
/// holds the content, pick uniformly among all covering BSs; otherwise pick
/// uniformly among covering BSs holding it.
pub fn assign_server<G: Rng + ?Sized>(req: &RequestEvent, cache: &CacheMatrix, rng: &mut G, eta: f64) -> ServerChoice {
    debug_assert!(!req.members.is_empty());
    debug_assert!((0.0..1.0).contains(&eta));
    let holders = cache.holders(req.content, req.members);
    let explore = eta > 0.0 && rng.gen::<f64>() < eta;
    let pool = if explore || holders.is_empty() {
        req.members
    } else {
        holders
    };
    let pick = rng.gen_range(0..pool.len());
    let bs = pool.iter().nth(pick).expect("pick < pool size");
    ServerChoice {
        bs,
        probability: server_probability(req.members, holders, bs, eta),
    }
}

/// Probability that `bs` serves a request from `members` given the holders.
pub fn server_probability(members: BsSet, holders: BsSet, bs: usize, eta: f64) -> f64 {
    if !members.contains(bs) {
        return 0.0;
    }
    let uniform = 1.0 / members.len() as f64;
    if holders.is_empty() {
        uniform
    } else {
        let targeted = if holders.contains(bs) {
            1.0 / holders.len() as f64
        } else {
            0.0
        };
        eta * uniform + (1.0 - eta) * targeted
    }
}

/// Smoothed running estimates of `λ_i |C(s)|`:
/// `(count + c0) / (elapsed + t0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimates {
    n_contents: usize,
    counts: Vec<f64>,
    elapsed: f64,
    c0: f64,
    t0: f64,
}

impl RateEstimates {
    pub fn new(n_segments: usize, n_contents: usize, c0: f64, t0: f64) -> Result<Self> {
        if !(c0.is_finite() && c0 > 0.0 && t0.is_finite() && t0 > 0.0) {
            return Err(Error::InvalidSimulation("estimator smoothing constants must be positive"));
        }
        Ok(RateEstimates {
            n_contents,
            counts: alloc::vec![0.0; n_segments * n_contents],
            elapsed: 0.0,
            c0,
            t0,
        })
    }

    pub fn for_topology(top: &CellTopology, cat: &ContentCatalog) -> Self {
        Self::new(top.segments().len(), cat.len(), 1.0, 1.0).expect("default constants are valid")
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn n_segments(&self) -> usize {
        self.counts.len() / self.n_contents
    }

    pub fn n_contents(&self) -> usize {
        self.n_contents
    }

    /// Moves the clock forward without an observation.
    pub fn advance(&mut self, now: f64) -> Result<()> {
        if now < self.elapsed {
            return Err(Error::TimeRegression {
                now,
                last: self.elapsed,
            });
        }
        self.elapsed = now;
        Ok(())
    }

    /// Counts one arrival.
    pub fn observe(&mut self, req: &RequestEvent, now: f64) -> Result<()> {
        self.observe_weighted(req.content, req.segment, 1.0, now)
    }

    /// Counts an arrival with an importance weight (inverse observation
    /// probability when only a fraction of arrivals is seen).
    pub fn observe_weighted(&mut self, content: usize, segment: usize, weight: f64, now: f64) -> Result<()> {
        self.advance(now)?;
        self.counts[segment * self.n_contents + content] += weight;
        Ok(())
    }

    pub fn count(&self, content: usize, segment: usize) -> f64 {
        self.counts[segment * self.n_contents + content]
    }

    pub fn estimate(&self, content: usize, segment: usize) -> f64 {
        (self.count(content, segment) + self.c0) / (self.elapsed + self.t0)
    }
}

impl SegmentRates for RateEstimates {
    fn rate(&self, content: usize, segment: usize) -> f64 {
        self.estimate(content, segment)
    }
}

/// Local energy with the true rates replaced by on-line estimates.
pub fn estimated_local_energy(
    top: &CellTopology,
    est: &RateEstimates,
    a: &CacheMatrix,
    bs: usize,
) -> Result<f64> {
    a.check_dims(est.n_contents(), top.n_bs())?;
    crate::model::local_energy_with(top, est, a, bs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{conditional_distribution, DEFAULT_COLUMN_LIMIT};
    use crate::model::{local_energy, Placement};

    fn sec6() -> (CellTopology, ContentCatalog) {
        (
            CellTopology::from_intervals(&[(0.0, 6.0), (1.0, 10.0)]).unwrap(),
            ContentCatalog::from_popularities(0.1, &[0.55, 0.45]).unwrap(),
        )
    }

    fn both() -> BsSet {
        [0, 1].into_iter().collect()
    }

    #[test]
    fn sec6_stream_marginals() {
        let (top, cat) = sec6();
        let mut s = RequestStream::new(&top, &cat, 1).unwrap();
        assert!((s.total_rate() - 1.0).abs() < 1e-12);
        let n = 1_000_000;
        let mut now = 0.0;
        let (mut first, mut shared) = (0u32, 0u32);
        for _ in 0..n {
            let r = s.next_request(now);
            assert!(r.time > now);
            now = r.time;
            first += (r.content == 0) as u32;
            shared += (r.members == both()) as u32;
        }
        assert!((now / n as f64 - 1.0).abs() < 0.01);
        assert!((first as f64 / n as f64 - 0.55).abs() < 0.005);
        assert!((shared as f64 / n as f64 - 0.5).abs() < 0.005);
    }

    #[test]
    fn window_counts_are_poisson() {
        let (top, cat) = sec6();
        let mut s = RequestStream::new(&top, &cat, 2).unwrap();
        let windows = 1000;
        let width = 50.0;
        let mut counts = alloc::vec![0u32; windows];
        let mut r = s.next_request(0.0);
        while r.time < windows as f64 * width {
            counts[(r.time / width) as usize] += 1;
            r = s.next_request(r.time);
        }
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / windows as f64;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (windows - 1) as f64;
        // sampling sd of the dispersion index over 1000 windows is about 0.045
        assert!((var / mean - 1.0).abs() < 0.15, "dispersion {}", var / mean);
        assert!((mean - width).abs() < 1.0);
    }

    #[test]
    fn estimates_converge() {
        let (top, cat) = sec6();
        let mut s = RequestStream::new(&top, &cat, 3).unwrap();
        let mut est = RateEstimates::for_topology(&top, &cat);
        let mut r = s.next_request(0.0);
        while r.time < 1e4 {
            est.observe(&r, r.time).unwrap();
            r = s.next_request(r.time);
        }
        est.advance(1e4).unwrap();
        let seg = top.segment_index(both()).unwrap();
        assert!((est.estimate(0, seg) / 0.275 - 1.0).abs() < 0.05);
    }

    #[test]
    fn estimates_never_vanish() {
        let (top, cat) = sec6();
        let mut est = RateEstimates::for_topology(&top, &cat);
        assert_eq!(est.estimate(1, 0), 1.0);
        est.advance(9.0).unwrap();
        assert!((est.estimate(1, 2) - 0.1).abs() < 1e-15);
        assert!(matches!(est.advance(3.0), Err(Error::TimeRegression { .. })));
    }

    #[test]
    fn server_choice_frequencies() {
        let (top, _) = sec6();
        let seg = top.segment_index(both()).unwrap();
        let req = RequestEvent { time: 0.0, content: 0, segment: seg, members: both() };
        let both_hold = Placement::uniform(2, 2, &[0]).unwrap();
        let mut rng = substream(9, Substream::ServerPick);
        let n = 100_000;
        let mut first = 0;
        for _ in 0..n {
            let c = assign_server(&req, &both_hold, &mut rng, 0.0);
            assert_eq!(c.probability, 0.5);
            first += (c.bs == 0) as u32;
        }
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.01);

        let neither = Placement::uniform(2, 2, &[1]).unwrap();
        let mut first = 0;
        for _ in 0..n {
            let c = assign_server(&req, &neither, &mut rng, 0.0);
            assert!(!neither.holds(0, c.bs));
            first += (c.bs == 0) as u32;
        }
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.01);

        let single = RequestEvent { time: 0.0, content: 0, segment: 0, members: BsSet::singleton(0) };
        for _ in 0..100 {
            assert_eq!(assign_server(&single, &both_hold, &mut rng, 0.0).bs, 0);
        }
    }

    #[test]
    fn exploration_reaches_non_holders() {
        let only_first = Placement::from_columns(2, 1, &[alloc::vec![0], alloc::vec![1]]).unwrap();
        let req = RequestEvent { time: 0.0, content: 0, segment: 1, members: both() };
        let mut rng = substream(4, Substream::ServerPick);
        let n = 200_000;
        let eta = 0.2;
        let second = (0..n)
            .filter(|_| assign_server(&req, &only_first, &mut rng, eta).bs == 1)
            .count();
        let p = server_probability(both(), BsSet::singleton(0), 1, eta);
        assert!((p - 0.1).abs() < 1e-15);
        assert!((second as f64 / n as f64 - p).abs() < 0.005);
    }

    #[test]
    fn exact_estimates_reproduce_local_energy() {
        let (top, cat) = sec6();
        let mut est = RateEstimates::new(top.segments().len(), 2, 1e-300, 1.0).unwrap();
        for (seg, s) in top.segments().iter().enumerate() {
            for i in 0..2 {
                est.observe_weighted(i, seg, cat.intensity(i) * s.area, 0.0).unwrap();
            }
        }
        let v = Placement::from_columns(2, 1, &[alloc::vec![1], alloc::vec![0]]).unwrap();
        for j in 0..2 {
            let truth = local_energy(&top, &cat, &v, j).unwrap();
            assert!((estimated_local_energy(&top, &est, &v, j).unwrap() - truth).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_rates_give_uniform_conditional() {
        // No shared segment, so no sharing denominators can break the tie.
        let top = CellTopology::from_intervals(&[(0.0, 2.0), (3.0, 7.0)]).unwrap();
        let mut est = RateEstimates::for_topology(&top, &ContentCatalog::new(alloc::vec![1.0, 1.0]).unwrap());
        for seg in 0..top.segments().len() {
            for i in 0..2 {
                est.observe_weighted(i, seg, 3.0 + seg as f64, 0.0).unwrap();
            }
        }
        let v = Placement::from_columns(2, 1, &[alloc::vec![0], alloc::vec![1]]).unwrap();
        for beta in [0.5, 5.0, 50.0] {
            for j in 0..2 {
                let d = conditional_distribution(&top, &est, &v, j, beta, DEFAULT_COLUMN_LIMIT).unwrap();
                assert!((d.probabilities[0] - 0.5).abs() < 1e-12);
            }
        }

        // With an overlap, equal rates still favour the content the neighbour lacks.
        let (top, _) = sec6();
        let mut est = RateEstimates::for_topology(&top, &ContentCatalog::new(alloc::vec![1.0, 1.0]).unwrap());
        for seg in 0..top.segments().len() {
            for i in 0..2 {
                est.observe_weighted(i, seg, 2.0, 0.0).unwrap();
            }
        }
        let d = conditional_distribution(&top, &est, &v, 0, 1.0, DEFAULT_COLUMN_LIMIT).unwrap();
        assert!(d.probabilities[0] > 0.5);
    }
}
