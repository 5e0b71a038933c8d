use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("base station index {bs} is out of range for {n_bs} base stations")]
    BsOutOfRange { bs: usize, n_bs: usize },
    #[error("number of base stations must be in 1..={max}, got {n_bs}")]
    InvalidBsCount { n_bs: usize, max: usize },
    #[error("segment key must be a non-empty set of base stations")]
    EmptySegment,
    #[error("segment {bits:#x} appears more than once")]
    DuplicateSegment { bits: u64 },
    #[error("segment area must be finite and non-negative, got {area}")]
    InvalidArea { area: f64 },
    #[error("topology has {count} positive-area segments, limit is {limit}")]
    TooManySegments { count: usize, limit: usize },
    #[error("at least one interval is required")]
    NoIntervals,
    #[error("interval {index} is invalid: need finite lo < hi, got ({lo}, {hi})")]
    InvalidInterval { index: usize, lo: f64, hi: f64 },
    #[error("disc {index} has invalid radius {radius}")]
    InvalidRadius { index: usize, radius: f64 },
    #[error("{centers} disc centers but {radii} radii")]
    DiscCountMismatch { centers: usize, radii: usize },
    #[error("grid step must be finite and positive, got {step}")]
    InvalidGridStep { step: f64 },
    #[error("content intensities must be finite and positive; content {content} has {value}")]
    InvalidIntensity { content: usize, value: f64 },
    #[error("content catalog is empty")]
    EmptyCatalog,
    #[error("content index {content} is out of range for {n_contents} contents")]
    ContentOutOfRange { content: usize, n_contents: usize },
    #[error("cache size K={cache_size} must satisfy 1 <= K < M={n_contents}")]
    InvalidCacheSize { cache_size: usize, n_contents: usize },
    #[error("column {bs} holds {found} contents, expected exactly {expected}")]
    ColumnSum { bs: usize, found: usize, expected: usize },
    #[error("matrix entries must be 0 or 1")]
    NotBinary,
    #[error("dimension mismatch: expected {expected_contents}x{expected_bs}, got {contents}x{bs}")]
    DimensionMismatch {
        expected_contents: usize,
        expected_bs: usize,
        contents: usize,
        bs: usize,
    },
    #[error("{what}: {count} exceeds the enumeration limit {limit}")]
    Capacity {
        what: &'static str,
        count: u128,
        limit: u64,
    },
    #[error("inverse temperature must be finite and non-negative, got {beta}")]
    InvalidBeta { beta: f64 },
    #[error("probability {value} is outside {range}")]
    InvalidProbability { value: f64, range: &'static str },
    #[error("time went backwards: {now} < {last}")]
    TimeRegression { now: f64, last: f64 },
    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("the measurement window is empty")]
    EmptyWindow,
    #[error("total request rate must be positive")]
    ZeroTraffic,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("invalid simulation parameter: {0}")]
    InvalidSimulation(&'static str),
}
