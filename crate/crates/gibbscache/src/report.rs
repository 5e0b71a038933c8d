//! Result records and the experiment drivers behind each subcommand.
//!
//! Contents and BSs are numbered from 1 in every record; segment masks set
//! bit `j - 1` for BS `j`.

use gibbscache_core::gibbs::exact::{expected_hit_rate, hit_rates, stationary_distribution};
use gibbscache_core::gibbs::BetaSchedule;
use gibbscache_core::model::{hit_rate, SegmentRates};
use gibbscache_core::oracle::{most_popular_placement, optimize_independent, OptimumReport};
use gibbscache_core::sim::{self, SimConfig, SimTrace};
use gibbscache_core::subsets::PlacementSpace;
use gibbscache_core::{CacheMatrix, Placement};
use serde::{Deserialize, Serialize};

use crate::config::Experiment;
use crate::error::{Error, Result};
use crate::replicate::{mean_stderr, replicate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub placement: Vec<Vec<u8>>,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentBaseline {
    /// Storage probability of each content, shared by all BSs.
    pub marginals: Vec<f64>,
    pub hit_rate: f64,
}

/// Output of the `optimal` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalReport {
    pub argmax: Vec<Vec<Vec<u8>>>,
    pub unique: bool,
    pub h_max: f64,
    pub h_min: f64,
    pub delta: f64,
    pub evaluated: u64,
    pub most_popular: Baseline,
    pub independent: IndependentBaseline,
}

fn oracle(exp: &Experiment) -> Result<&OptimumReport> {
    exp.optimum.as_ref().ok_or_else(|| {
        Error::invalid(
            "gibbs.enumeration_limit",
            "the placement space is too large to enumerate",
            "raise gibbs.enumeration_limit or shrink the instance",
        )
    })
}

pub fn optimal_report(exp: &Experiment) -> Result<OptimalReport> {
    let opt = oracle(exp)?;
    let (top, cat, k) = (exp.topology(), exp.catalog(), exp.cache_size());
    let popular = most_popular_placement(cat, top.n_bs(), k)?;
    let independent = optimize_independent(top, cat, k)?;
    Ok(OptimalReport {
        argmax: opt.argmax.iter().map(|p| p.to_rows()).collect(),
        unique: opt.is_unique(),
        h_max: opt.h_max,
        h_min: opt.h_min,
        delta: opt.delta,
        evaluated: opt.evaluated,
        most_popular: Baseline {
            hit_rate: hit_rate(top, cat, &popular)?,
            placement: popular.to_rows(),
        },
        independent: IndependentBaseline {
            marginals: independent.marginals,
            hit_rate: independent.hit_rate,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub time: f64,
    pub content: usize,
    pub segment: u64,
    pub bs: usize,
    pub hit: bool,
    pub store: bool,
    /// Evicted contents separated by `;`.
    pub evict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRow {
    pub t: u64,
    pub bs: usize,
    pub beta: f64,
    pub h_v: f64,
    /// New column of the updated BS, one character per content.
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    /// 0 for the shared estimator, otherwise the owning BS.
    pub estimator: usize,
    pub content: usize,
    pub segment: u64,
    pub count: f64,
    pub estimate: f64,
    pub truth: f64,
}

pub fn event_rows(trace: &SimTrace, cfg: &SimConfig) -> Vec<EventRow> {
    trace
        .events
        .iter()
        .map(|e| EventRow {
            time: e.time,
            content: e.content + 1,
            segment: cfg.topology.segment(e.segment).members.bits(),
            bs: e.bs + 1,
            hit: e.hit,
            store: e.stored,
            evict: e.evicted.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(";"),
        })
        .collect()
}

pub fn slot_rows(trace: &SimTrace) -> Vec<SlotRow> {
    trace
        .slots
        .iter()
        .map(|s| SlotRow {
            t: s.slot,
            bs: s.bs + 1,
            beta: s.beta,
            h_v: trace.state_hit_rates[s.state as usize],
            column: trace.states[s.state as usize].column_bits(s.bs),
        })
        .collect()
}

pub fn estimate_rows(trace: &SimTrace, cfg: &SimConfig) -> Vec<EstimateRow> {
    let rates = cfg.catalog.rates(&cfg.topology);
    let shared = trace.estimates.len() == 1;
    let mut rows = Vec::new();
    for (owner, est) in trace.estimates.iter().enumerate() {
        for (s, seg) in cfg.topology.segments().iter().enumerate() {
            if !shared && !seg.members.contains(owner) {
                continue;
            }
            for i in 0..cfg.catalog.len() {
                rows.push(EstimateRow {
                    estimator: if shared { 0 } else { owner + 1 },
                    content: i + 1,
                    segment: seg.members.bits(),
                    count: est.count(i, s),
                    estimate: est.estimate(i, s),
                    truth: rates.rate(i, s),
                });
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub start: f64,
    pub end: f64,
    pub requests: u64,
    pub hits: u64,
    /// Realised hits per unit time.
    pub realised_rate: f64,
    /// Time average of `h(R)` over the bin.
    pub expected_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyRow {
    pub placement: Vec<Vec<u8>>,
    pub hit_rate: f64,
    pub fraction: f64,
    pub fraction_post_burn_in: f64,
}

/// Per-replication `summary.json` content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub replication: usize,
    pub seed: u64,
    pub horizon: f64,
    pub slots: u64,
    pub snapshots: usize,
    pub requests: u64,
    pub hits: u64,
    pub misses: u64,
    pub realised_hit_rate: f64,
    pub time_average_hit_rate: f64,
    pub post_burn_in_hit_rate: f64,
    pub final_third_hit_rate: f64,
    /// Fraction of final-third slots with the virtual chain on an optimum.
    pub virtual_optimal_fraction: Option<f64>,
    pub series: Vec<SeriesPoint>,
    pub occupancy: Vec<OccupancyRow>,
    pub final_virtual: Vec<Vec<u8>>,
    pub final_real: Vec<Vec<u8>>,
}

pub fn summarize(trace: &SimTrace, replication: usize, burn_in: f64, optimum: Option<&OptimumReport>) -> Result<RunSummary> {
    let t = trace.horizon;
    let burn = sim::empirical_distribution(trace, burn_in)?;
    let mut occupancy: Vec<OccupancyRow> = sim::occupancy_times(trace)
        .into_iter()
        .map(|(m, time)| {
            let id = trace.states.iter().position(|s| *s == m).expect("interned");
            OccupancyRow {
                hit_rate: trace.state_hit_rates[id],
                fraction: time / t,
                fraction_post_burn_in: burn.get(&m).copied().unwrap_or(0.0),
                placement: m.to_rows(),
            }
        })
        .collect();
    occupancy.sort_by(|a, b| b.fraction.total_cmp(&a.fraction));

    let mut series = Vec::with_capacity(trace.bins.len());
    for (k, bin) in trace.bins.iter().enumerate() {
        let start = k as f64 * trace.bin_width;
        let end = (start + trace.bin_width).min(t);
        if end <= start {
            continue;
        }
        series.push(SeriesPoint {
            start,
            end,
            requests: bin.requests,
            hits: bin.hits,
            realised_rate: bin.hits as f64 / (end - start),
            expected_rate: sim::time_average_hit_rate(trace, start, end)?,
        });
    }

    let virtual_optimal_fraction = match optimum {
        Some(opt) => {
            let dist = sim::virtual_distribution(trace, 2 * trace.n_slots / 3, trace.n_slots + 1)?;
            Some(sim::mass_on(&dist, opt.argmax.iter().map(|p| p.matrix())))
        }
        None => None,
    };

    Ok(RunSummary {
        replication,
        seed: trace.seed,
        horizon: t,
        slots: trace.n_slots,
        snapshots: trace.snapshots.len(),
        requests: trace.requests,
        hits: trace.hits,
        misses: trace.misses,
        realised_hit_rate: trace.hits as f64 / t,
        time_average_hit_rate: trace.hit_integral / t,
        post_burn_in_hit_rate: sim::time_average_hit_rate(trace, burn_in * t, t)?,
        final_third_hit_rate: sim::time_average_hit_rate(trace, 2.0 * t / 3.0, t)?,
        virtual_optimal_fraction,
        series,
        occupancy,
        final_virtual: trace.final_virtual.to_rows(),
        final_real: trace.final_real.to_rows(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub stderr: f64,
}

impl Interval {
    fn of(values: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(values);
        Interval { mean, stderr }
    }
}

/// Top-level `summary.json` of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub seed: u64,
    pub replications: usize,
    pub burn_in: f64,
    pub time_average_hit_rate: Interval,
    pub post_burn_in_hit_rate: Interval,
    pub final_third_hit_rate: Interval,
    pub realised_hit_rate: Interval,
    pub virtual_optimal_fraction: Option<Interval>,
    pub baselines: Option<OptimalReport>,
    pub warnings: Vec<String>,
    pub runs: Vec<RunSummary>,
}

/// Tables of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTables {
    pub events: Vec<EventRow>,
    pub slots: Vec<SlotRow>,
    pub estimates: Vec<EstimateRow>,
}

/// Runs every replication of `exp` and returns the summary together with
/// each replication's tables.
pub fn simulate(exp: &Experiment) -> Result<(SimulationSummary, Vec<RunTables>)> {
    let runs = replicate(exp.seed, exp.replications, |k, seed| {
        let trace = sim::run(&exp.sim, seed)?;
        let summary = summarize(&trace, k, exp.burn_in, exp.optimum.as_ref())?;
        let tables = RunTables {
            events: event_rows(&trace, &exp.sim),
            slots: slot_rows(&trace),
            estimates: estimate_rows(&trace, &exp.sim),
        };
        Ok((summary, tables))
    })?;
    let (runs, tables): (Vec<RunSummary>, Vec<RunTables>) = runs.into_iter().unzip();
    let pick = |f: fn(&RunSummary) -> f64| Interval::of(&runs.iter().map(f).collect::<Vec<_>>());
    let virtual_optimal_fraction = runs
        .iter()
        .map(|r| r.virtual_optimal_fraction)
        .collect::<Option<Vec<f64>>>()
        .map(|v| Interval::of(&v));
    let baselines = match exp.optimum {
        Some(_) => Some(optimal_report(exp)?),
        None => None,
    };
    Ok((
        SimulationSummary {
            seed: exp.seed,
            replications: exp.replications,
            burn_in: exp.burn_in,
            time_average_hit_rate: pick(|r| r.time_average_hit_rate),
            post_burn_in_hit_rate: pick(|r| r.post_burn_in_hit_rate),
            final_third_hit_rate: pick(|r| r.final_third_hit_rate),
            realised_hit_rate: pick(|r| r.realised_hit_rate),
            virtual_optimal_fraction,
            baselines,
            warnings: exp.warnings.clone(),
            runs,
        },
        tables,
    ))
}

/// One point of `sweep-beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    /// `Σ π_β(B) h(B)`, when the space can be enumerated.
    pub exact_expected_hit_rate: Option<f64>,
    /// Post-burn-in time average of `h(R)` over replications.
    pub simulated_mean: f64,
    pub simulated_stderr: f64,
    pub replications: usize,
}

/// Exact `Σ π_β(B) h(B)` over `betas`.
pub fn exact_curve(exp: &Experiment, betas: &[f64]) -> Result<Vec<f64>> {
    let (top, cat, k) = (exp.topology(), exp.catalog(), exp.cache_size());
    let space = PlacementSpace::new(cat.len(), top.n_bs(), k, exp.enumeration_limit)?;
    let rates = cat.rates(top);
    let h = hit_rates(top, &rates, &space);
    betas
        .iter()
        .map(|&b| Ok(expected_hit_rate(&h, &stationary_distribution(top, &rates, &space, b)?)))
        .collect()
}

pub fn sweep_beta(exp: &Experiment) -> Result<Vec<SweepRow>> {
    let exact = if exp.optimum.is_some() {
        Some(exact_curve(exp, &exp.beta_grid)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(exp.beta_grid.len());
    for (idx, &beta) in exp.beta_grid.iter().enumerate() {
        let mut cfg = exp.sim.clone();
        cfg.schedule = BetaSchedule::Fixed(beta);
        cfg.record = Default::default();
        let values = replicate(exp.seed, exp.replications, |_, seed| {
            let trace = sim::run(&cfg, seed)?;
            Ok(sim::time_average_hit_rate(&trace, exp.burn_in * trace.horizon, trace.horizon)?)
        })?;
        let (mean, stderr) = mean_stderr(&values);
        rows.push(SweepRow {
            beta,
            exact_expected_hit_rate: exact.as_ref().map(|e| e[idx]),
            simulated_mean: mean,
            simulated_stderr: stderr,
            replications: exp.replications,
        });
    }
    Ok(rows)
}

/// One point of the three-curve comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub beta: f64,
    pub gibbs_exact: f64,
    pub gibbs_simulated: f64,
    pub gibbs_simulated_stderr: f64,
    pub independent: f64,
    pub most_popular: f64,
    pub optimum: f64,
}

pub fn reproduce_fig2(exp: &Experiment) -> Result<Vec<Fig2Row>> {
    let report = optimal_report(exp)?;
    let sweep = sweep_beta(exp)?;
    Ok(sweep
        .into_iter()
        .map(|r| Fig2Row {
            beta: r.beta,
            gibbs_exact: r.exact_expected_hit_rate.expect("oracle checked above"),
            gibbs_simulated: r.simulated_mean,
            gibbs_simulated_stderr: r.simulated_stderr,
            independent: report.independent.hit_rate,
            most_popular: report.most_popular.hit_rate,
            optimum: report.h_max,
        })
        .collect())
}

/// Reads back a placement written by this crate.
pub fn placement_from_rows(rows: &[Vec<u8>]) -> Result<Placement> {
    let matrix = CacheMatrix::from_rows(rows)?;
    Ok(Placement::try_from(matrix)?)
}
