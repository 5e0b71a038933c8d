//! Experiment configuration files.
//!
//! A config is one JSON document with the sections `topology`, `catalog`,
//! `cache`, `gibbs`, `schedule`, `traffic` and `sim`. BS ids in the file are
//! 1-based. See the README for every field.

use std::path::Path;

use gibbscache_core::gibbs::{validate_beta0, BetaSchedule, DEFAULT_COLUMN_LIMIT};
use gibbscache_core::gibbs::exact::DEFAULT_SPACE_LIMIT;
use gibbscache_core::oracle::{enumerate_optimal, OptimumReport};
use gibbscache_core::realcache::{Growth, SnapshotSchedule};
use gibbscache_core::sim::{Learning, LearningMode, Recording, SimConfig};
use gibbscache_core::subsets::binomial;
use gibbscache_core::{BsSet, CacheMatrix, CellTopology, ContentCatalog, Placement};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default β grid of `sweep-beta` and `reproduce-fig2`.
pub const DEFAULT_BETA_GRID: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub topology: TopologySection,
    pub catalog: CatalogSection,
    pub cache: CacheSection,
    pub gibbs: GibbsSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub traffic: TrafficSection,
    #[serde(default)]
    pub sim: SimSection,
}

/// Exactly one of `intervals`, `segments` or `discs`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<SegmentEntry>>,
    /// Required with `segments`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discs: Option<Vec<DiscEntry>>,
    /// Required with `discs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub bs: Vec<usize>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscEntry {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Either `intensities`, or `total_intensity` with `popularities`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_intensity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheSection {
    pub size: usize,
}

/// Exactly one of `beta` (fixed) or `beta0` (annealed).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default = "default_column_limit")]
    pub column_limit: u64,
    #[serde(default = "default_space_limit")]
    pub enumeration_limit: u64,
    #[serde(default = "default_beta_grid")]
    pub beta_grid: Vec<f64>,
}

fn default_column_limit() -> u64 {
    DEFAULT_COLUMN_LIMIT
}

fn default_space_limit() -> u64 {
    DEFAULT_SPACE_LIMIT
}

fn default_beta_grid() -> Vec<f64> {
    DEFAULT_BETA_GRID.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    #[default]
    Linear,
    Geometric,
}

/// Snapshot epochs: `T_k = first * k` or `first * ratio^(k-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default = "default_first_epoch")]
    pub first: f64,
    #[serde(default)]
    pub growth: GrowthKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

fn default_first_epoch() -> f64 {
    10.0
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection {
            first: default_first_epoch(),
            growth: GrowthKind::Linear,
            ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    #[serde(default)]
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning: Option<LearningSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningKind {
    #[default]
    Shared,
    PerBs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningSection {
    #[serde(default)]
    pub mode: LearningKind,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default = "one")]
    pub t0: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub slot_length: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
    #[serde(default = "yes")]
    pub record_events: bool,
    #[serde(default = "yes")]
    pub record_slots: bool,
    /// 0/1 rows (contents) by columns (BSs); most-popular when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Vec<u8>>>,
}

fn default_horizon() -> f64 {
    1e4
}

fn default_replications() -> usize {
    1
}

fn default_burn_in() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            horizon: default_horizon(),
            slot_length: 1.0,
            seed: 0,
            replications: default_replications(),
            burn_in: default_burn_in(),
            bin_width: None,
            record_events: true,
            record_slots: true,
            initial: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub horizon: Option<f64>,
}

impl RawConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.sim.seed = seed;
        }
        if let Some(r) = o.replications {
            self.sim.replications = r;
        }
        if let Some(h) = o.horizon {
            self.sim.horizon = h;
        }
    }
}

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub sim: SimConfig,
    pub seed: u64,
    pub replications: usize,
    pub burn_in: f64,
    pub beta_grid: Vec<f64>,
    pub enumeration_limit: u64,
    /// Present whenever the placement space is small enough to enumerate.
    pub optimum: Option<OptimumReport>,
    /// Checks that could not be run.
    pub warnings: Vec<String>,
}

impl Experiment {
    pub fn topology(&self) -> &CellTopology {
        &self.sim.topology
    }

    pub fn catalog(&self) -> &ContentCatalog {
        &self.sim.catalog
    }

    pub fn cache_size(&self) -> usize {
        self.sim.cache_size
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Experiment> {
    parse_config_with(path, &Overrides::default())
}

pub fn parse_config_with(path: impl AsRef<Path>, overrides: &Overrides) -> Result<Experiment> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw = parse_str(&text).map_err(|e| match e {
        Error::Parse { field, message, .. } => Error::Parse {
            file: path.to_path_buf(),
            field,
            message,
        },
        other => other,
    })?;
    raw.apply(overrides);
    validate(&raw)
}

/// Parses config text without validating it.
pub fn parse_str(text: &str) -> Result<RawConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        file: "<config>".into(),
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

pub fn validate(raw: &RawConfig) -> Result<Experiment> {
    let topology = build_topology(&raw.topology)?;
    let catalog = build_catalog(&raw.catalog)?;
    let m = catalog.len();
    let n = topology.n_bs();

    let k = raw.cache.size;
    if k == 0 || k >= m {
        return Err(Error::invalid(
            "cache.size",
            format!("cache size {k} with {m} contents"),
            format!("choose 1 <= size < {m}; a cache holding every content makes placement trivial"),
        ));
    }
    let columns = binomial(m, k).unwrap_or(u128::MAX);
    if columns > raw.gibbs.column_limit as u128 {
        return Err(Error::invalid(
            "gibbs.column_limit",
            format!("C({m}, {k}) = {columns} candidate columns exceed the limit {}", raw.gibbs.column_limit),
            "reduce catalog or cache size, or raise gibbs.column_limit",
        ));
    }

    let schedule = match (raw.gibbs.beta, raw.gibbs.beta0) {
        (Some(beta), None) => {
            if !(beta.is_finite() && beta >= 0.0) {
                return Err(Error::invalid("gibbs.beta", format!("beta = {beta}"), "use a finite beta >= 0"));
            }
            BetaSchedule::Fixed(beta)
        }
        (None, Some(beta0)) => {
            if !(beta0.is_finite() && beta0 > 0.0) {
                return Err(Error::invalid("gibbs.beta0", format!("beta0 = {beta0}"), "use a finite beta0 > 0"));
            }
            BetaSchedule::Annealed { beta0 }
        }
        _ => {
            return Err(Error::invalid(
                "gibbs",
                "exactly one of `beta` and `beta0` must be set",
                "set `beta` for a fixed inverse temperature or `beta0` for annealing",
            ))
        }
    };
    for (i, &b) in raw.gibbs.beta_grid.iter().enumerate() {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::invalid(format!("gibbs.beta_grid[{i}]"), format!("beta = {b}"), "use finite values >= 0"));
        }
    }

    let eta = raw.traffic.eta;
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::invalid("traffic.eta", format!("eta = {eta}"), "use 0 <= eta < 1"));
    }
    let lonely = topology.without_exclusive_region();
    if eta == 0.0 && !lonely.is_empty() {
        let ids: Vec<String> = lonely.iter().map(|j| (j + 1).to_string()).collect();
        return Err(Error::invalid(
            "traffic.eta",
            format!(
                "BS {} has no exclusive coverage region, so with eta = 0 it may stop receiving requests",
                ids.join(", ")
            ),
            "set traffic.eta > 0 (for example 0.05) so every BS keeps seeing requests",
        ));
    }

    let learning = match &raw.traffic.learning {
        None => None,
        Some(l) => {
            if !(l.c0.is_finite() && l.c0 > 0.0) {
                return Err(Error::invalid("traffic.learning.c0", format!("c0 = {}", l.c0), "use c0 > 0"));
            }
            if !(l.t0.is_finite() && l.t0 > 0.0) {
                return Err(Error::invalid("traffic.learning.t0", format!("t0 = {}", l.t0), "use t0 > 0"));
            }
            let mode = match l.mode {
                LearningKind::Shared => LearningMode::Shared,
                LearningKind::PerBs => {
                    if eta <= 0.0 {
                        return Err(Error::invalid(
                            "traffic.learning.mode",
                            "per_bs estimates are only unbiased when every BS can serve every request",
                            "set traffic.eta > 0 or use mode \"shared\"",
                        ));
                    }
                    LearningMode::PerBs
                }
            };
            Some(Learning {
                mode,
                c0: l.c0,
                t0: l.t0,
            })
        }
    };

    let growth = match (raw.schedule.growth, raw.schedule.ratio) {
        (GrowthKind::Linear, None) => Growth::Linear,
        (GrowthKind::Linear, Some(_)) => {
            return Err(Error::invalid(
                "schedule.ratio",
                "ratio given with linear growth",
                "remove `ratio` or set growth to \"geometric\"",
            ))
        }
        (GrowthKind::Geometric, Some(ratio)) if ratio.is_finite() && ratio > 1.0 => Growth::Geometric { ratio },
        (GrowthKind::Geometric, r) => {
            return Err(Error::invalid(
                "schedule.ratio",
                format!("geometric growth needs a ratio > 1, got {r:?}"),
                "set schedule.ratio, for example 1.5",
            ))
        }
    };
    let snapshots = SnapshotSchedule {
        first: raw.schedule.first,
        growth,
    };
    if snapshots.validate().is_err() {
        return Err(Error::invalid(
            "schedule.first",
            format!("first epoch length {}", raw.schedule.first),
            "use a positive length",
        ));
    }

    let s = &raw.sim;
    if !(s.horizon.is_finite() && s.horizon > 0.0) {
        return Err(Error::invalid("sim.horizon", format!("horizon {}", s.horizon), "use a positive horizon"));
    }
    if !(s.slot_length.is_finite() && s.slot_length > 0.0) {
        return Err(Error::invalid("sim.slot_length", format!("slot length {}", s.slot_length), "use a positive length"));
    }
    if s.replications == 0 {
        return Err(Error::invalid("sim.replications", "no replications", "use at least 1"));
    }
    if !(0.0..1.0).contains(&s.burn_in) {
        return Err(Error::invalid("sim.burn_in", format!("burn-in fraction {}", s.burn_in), "use 0 <= burn_in < 1"));
    }
    if let Some(w) = s.bin_width {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid("sim.bin_width", format!("bin width {w}"), "use a positive width or omit it"));
        }
    }
    let initial = match &s.initial {
        None => None,
        Some(rows) => {
            let matrix = CacheMatrix::from_rows(rows)
                .map_err(|e| Error::invalid("sim.initial", e.to_string(), "give one 0/1 row per content"))?;
            if matrix.n_contents() != m || matrix.n_bs() != n {
                return Err(Error::invalid(
                    "sim.initial",
                    format!("{}x{} matrix for {m} contents and {n} BSs", matrix.n_contents(), matrix.n_bs()),
                    "give one row per content and one column per BS",
                ));
            }
            Some(Placement::from_matrix(matrix, k).map_err(|e| {
                Error::invalid("sim.initial", e.to_string(), format!("every column must hold exactly {k} contents"))
            })?)
        }
    };

    let mut warnings = Vec::new();
    let optimum = match enumerate_optimal(&topology, &catalog, k, raw.gibbs.enumeration_limit) {
        Ok(r) => Some(r),
        Err(gibbscache_core::Error::Capacity { .. }) => {
            warnings.push(format!(
                "placement space exceeds gibbs.enumeration_limit = {}; exact checks skipped",
                raw.gibbs.enumeration_limit
            ));
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let (BetaSchedule::Annealed { beta0 }, Some(opt)) = (schedule, &optimum) {
        if let Err(v) = validate_beta0(beta0, opt.delta, opt.h_max, n) {
            let mut broken = Vec::new();
            if v.spread_violated {
                broken.push(format!("beta0 * N * delta = {:.4} >= 1", v.spread_product));
            }
            if v.peak_violated {
                broken.push(format!("beta0 * max h = {:.4} >= 1", v.peak_product));
            }
            return Err(Error::invalid(
                "gibbs.beta0",
                broken.join(" and "),
                format!("use beta0 < {:.6}", v.max_admissible),
            ));
        }
    }

    let mut sim = SimConfig::new(topology, catalog, k, schedule);
    sim.snapshots = snapshots;
    sim.slot_length = s.slot_length;
    sim.eta = eta;
    sim.learning = learning;
    sim.horizon = s.horizon;
    sim.initial = initial;
    sim.record = Recording {
        events: s.record_events,
        slots: s.record_slots,
    };
    sim.bin_width = s.bin_width;
    sim.column_limit = raw.gibbs.column_limit;
    sim.validate()?;

    Ok(Experiment {
        sim,
        seed: s.seed,
        replications: s.replications,
        burn_in: s.burn_in,
        beta_grid: raw.gibbs.beta_grid.clone(),
        enumeration_limit: raw.gibbs.enumeration_limit,
        optimum,
        warnings,
    })
}

fn build_topology(t: &TopologySection) -> Result<CellTopology> {
    let given = [t.intervals.is_some(), t.segments.is_some(), t.discs.is_some()];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(Error::invalid(
            "topology",
            "exactly one of `intervals`, `segments` and `discs` must be set",
            "describe the cells in one form only",
        ));
    }
    if let Some(intervals) = &t.intervals {
        let pairs: Vec<(f64, f64)> = intervals.iter().map(|&[a, b]| (a, b)).collect();
        return CellTopology::from_intervals(&pairs).map_err(|e| {
            Error::invalid("topology.intervals", e.to_string(), "give one [lo, hi] pair with lo < hi per BS")
        });
    }
    if let Some(segments) = &t.segments {
        let n_bs = t.n_bs.ok_or_else(|| {
            Error::invalid("topology.n_bs", "missing", "set the number of BSs alongside `segments`")
        })?;
        let mut entries = Vec::with_capacity(segments.len());
        for (idx, seg) in segments.iter().enumerate() {
            let mut members = BsSet::EMPTY;
            for &id in &seg.bs {
                if id == 0 || id > n_bs {
                    return Err(Error::invalid(
                        format!("topology.segments[{idx}].bs"),
                        format!("BS id {id} outside 1..={n_bs}"),
                        "BS ids are 1-based",
                    ));
                }
                members.insert(id - 1);
            }
            entries.push((members, seg.area));
        }
        return CellTopology::from_segments(n_bs, entries).map_err(|e| {
            Error::invalid("topology.segments", e.to_string(), "list each covering set once with a finite area >= 0")
        });
    }
    let discs = t.discs.as_ref().expect("one form is set");
    let step = t.grid_step.ok_or_else(|| {
        Error::invalid("topology.grid_step", "missing", "set the grid resolution alongside `discs`, for example 0.01")
    })?;
    let centers: Vec<(f64, f64)> = discs.iter().map(|d| (d.center[0], d.center[1])).collect();
    let radii: Vec<f64> = discs.iter().map(|d| d.radius).collect();
    CellTopology::from_discs(&centers, &radii, step)
        .map_err(|e| Error::invalid("topology.discs", e.to_string(), "use positive radii and grid_step"))
}

fn build_catalog(c: &CatalogSection) -> Result<ContentCatalog> {
    match (&c.intensities, c.total_intensity, &c.popularities) {
        (Some(rates), None, None) => ContentCatalog::new(rates.clone())
            .map_err(|e| Error::invalid("catalog.intensities", e.to_string(), "use finite positive intensities")),
        (None, Some(total), Some(pop)) => {
            let sum: f64 = pop.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    "catalog.popularities",
                    format!("popularities sum to {sum}"),
                    "normalise them to sum to 1",
                ));
            }
            ContentCatalog::from_popularities(total, pop).map_err(|e| {
                Error::invalid("catalog", e.to_string(), "use a positive total_intensity and positive popularities")
            })
        }
        _ => Err(Error::invalid(
            "catalog",
            "give either `intensities` or both `total_intensity` and `popularities`",
            "see the README for both forms",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEC6: &str = r#"{
        "topology": {"intervals": [[0, 6], [1, 10]]},
        "catalog": {"total_intensity": 0.1, "popularities": [0.55, 0.45]},
        "cache": {"size": 1},
        "gibbs": {"beta0": 1.0}
    }"#;

    fn with(edit: impl FnOnce(&mut RawConfig)) -> Result<Experiment> {
        let mut raw = parse_str(SEC6).unwrap();
        edit(&mut raw);
        validate(&raw)
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Invalid { field, .. } | Error::Parse { field, .. } => field,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn sec6_passes_the_gate() {
        let x = with(|_| {}).unwrap();
        let opt = x.optimum.unwrap();
        assert!((opt.h_max - 0.765).abs() < 1e-9);
        assert_eq!(x.sim.schedule, BetaSchedule::Annealed { beta0: 1.0 });
        assert_eq!(x.burn_in, 0.5);
        assert!(x.warnings.is_empty());
    }

    #[test]
    fn cache_must_be_smaller_than_catalog() {
        assert_eq!(field_of(with(|r| r.cache.size = 2).unwrap_err()), "cache.size");
        assert_eq!(field_of(with(|r| r.cache.size = 0).unwrap_err()), "cache.size");
    }

    #[test]
    fn missing_exclusive_region_needs_exploration() {
        let nested = |r: &mut RawConfig| r.topology.intervals = Some(vec![[0.0, 10.0], [2.0, 3.0]]);
        let err = with(nested).unwrap_err();
        assert!(err.to_string().contains("traffic.eta > 0"), "{err}");
        assert_eq!(field_of(err), "traffic.eta");
        with(|r| {
            nested(r);
            r.traffic.eta = 0.05;
        })
        .unwrap();
    }

    #[test]
    fn inadmissible_beta0() {
        let err = with(|r| r.gibbs.beta0 = Some(2.0)).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("beta0 < 1.30"), "{text}");
        assert_eq!(field_of(err), "gibbs.beta0");
    }

    #[test]
    fn one_beta_form() {
        assert_eq!(field_of(with(|r| r.gibbs.beta = Some(1.0)).unwrap_err()), "gibbs");
        assert_eq!(
            with(|r| {
                r.gibbs.beta0 = None;
                r.gibbs.beta = Some(3.0);
            })
            .unwrap()
            .sim
            .schedule,
            BetaSchedule::Fixed(3.0)
        );
    }

    #[test]
    fn unknown_fields_are_located() {
        let text = SEC6.replace("\"size\": 1", "\"size\": 1, \"sise\": 2");
        assert_eq!(field_of(parse_str(&text).unwrap_err()), "cache.sise");
        let text = SEC6.replace("\"size\": 1", "\"size\": -1");
        assert_eq!(field_of(parse_str(&text).unwrap_err()), "cache.size");
    }

    #[test]
    fn segments_are_one_based() {
        let seg = |r: &mut RawConfig| {
            r.topology.intervals = None;
            r.topology.n_bs = Some(2);
            r.topology.segments = Some(vec![
                SegmentEntry { bs: vec![1], area: 1.0 },
                SegmentEntry { bs: vec![1, 2], area: 5.0 },
                SegmentEntry { bs: vec![2], area: 4.0 },
            ]);
        };
        let x = with(seg).unwrap();
        assert_eq!(x.topology(), &CellTopology::from_intervals(&[(0.0, 6.0), (1.0, 10.0)]).unwrap());
        let err = with(|r| {
            seg(r);
            r.topology.segments.as_mut().unwrap()[0].bs = vec![0];
        })
        .unwrap_err();
        assert_eq!(field_of(err), "topology.segments[0].bs");
    }

    #[test]
    fn per_bs_learning_needs_eta() {
        let learn = |r: &mut RawConfig| {
            r.traffic.learning = Some(LearningSection {
                mode: LearningKind::PerBs,
                c0: 1.0,
                t0: 1.0,
            })
        };
        assert_eq!(field_of(with(learn).unwrap_err()), "traffic.learning.mode");
        with(|r| {
            learn(r);
            r.traffic.eta = 0.1;
        })
        .unwrap();
    }

    #[test]
    fn overrides_win() {
        let mut raw = parse_str(SEC6).unwrap();
        raw.apply(&Overrides {
            seed: Some(9),
            replications: Some(3),
            horizon: Some(50.0),
        });
        let x = validate(&raw).unwrap();
        assert_eq!((x.seed, x.replications, x.sim.horizon), (9, 3, 50.0));
    }

    #[test]
    fn oversized_space_only_warns() {
        let x = with(|r| {
            r.gibbs.beta0 = None;
            r.gibbs.beta = Some(1.0);
            r.gibbs.enumeration_limit = 2;
        })
        .unwrap();
        assert!(x.optimum.is_none());
        assert_eq!(x.warnings.len(), 1);
    }

    #[test]
    fn geometric_schedule_needs_ratio() {
        assert_eq!(
            field_of(with(|r| r.schedule.growth = GrowthKind::Geometric).unwrap_err()),
            "schedule.ratio"
        );
    }
}
