//! Content catalogs, cache matrices and the exact hit-rate algebra.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{BsSet, CellTopology};
use crate::{Error, Result};

/// Per-content spatial request intensities (requests / unit time / unit area).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ContentCatalog {
    intensities: Vec<f64>,
    total: f64,
}

impl ContentCatalog {
    pub fn new(intensities: Vec<f64>) -> Result<Self> {
        if intensities.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        if let Some((content, &value)) = intensities
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v.is_finite() && v > 0.0))
        {
            return Err(Error::InvalidIntensity { content, value });
        }
        let total = intensities.iter().sum();
        Ok(ContentCatalog { intensities, total })
    }

    /// Splits a total intensity according to popularity weights.
    pub fn from_popularities(total_intensity: f64, popularities: &[f64]) -> Result<Self> {
        Self::new(popularities.iter().map(|p| p * total_intensity).collect())
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn intensity(&self, content: usize) -> f64 {
        self.intensities[content]
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn total_intensity(&self) -> f64 {
        self.total
    }

    pub fn popularity(&self, content: usize) -> f64 {
        self.intensities[content] / self.total
    }

    /// The true per-segment request rates `λ_i |C(s)|` for this catalog.
    pub fn rates<'a>(&'a self, top: &'a CellTopology) -> TrueRates<'a> {
        TrueRates { top, catalog: self }
    }
}

impl TryFrom<Vec<f64>> for ContentCatalog {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ContentCatalog> for Vec<f64> {
    fn from(value: ContentCatalog) -> Self {
        value.intensities
    }
}

/// Request rate of each content from each stored segment.
///
/// The hit-rate algebra only ever consumes the products `λ_i |C(s)|`, so the
/// learning variant can swap in on-line estimates behind this trait.
pub trait SegmentRates {
    fn rate(&self, content: usize, segment: usize) -> f64;
}

impl<T: SegmentRates + ?Sized> SegmentRates for &T {
    fn rate(&self, content: usize, segment: usize) -> f64 {
        (**self).rate(content, segment)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrueRates<'a> {
    top: &'a CellTopology,
    catalog: &'a ContentCatalog,
}

impl SegmentRates for TrueRates<'_> {
    fn rate(&self, content: usize, segment: usize) -> f64 {
        self.catalog.intensity(content) * self.top.segment(segment).area
    }
}

/// Binary content-by-BS matrix. Columns may hold any number of contents.
///
/// Serialized as a list of 0/1 rows, one row per content.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct CacheMatrix {
    n_contents: usize,
    n_bs: usize,
    // column-major
    cells: Vec<bool>,
}

impl CacheMatrix {
    pub fn empty(n_contents: usize, n_bs: usize) -> Self {
        CacheMatrix {
            n_contents,
            n_bs,
            cells: alloc::vec![false; n_contents * n_bs],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n_contents = rows.len();
        let n_bs = rows.first().map_or(0, Vec::len);
        let mut m = CacheMatrix::empty(n_contents, n_bs);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_bs {
                return Err(Error::DimensionMismatch {
                    expected_contents: n_contents,
                    expected_bs: n_bs,
                    contents: n_contents,
                    bs: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(i, j, true),
                    _ => return Err(Error::NotBinary),
                }
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n_contents)
            .map(|i| (0..self.n_bs).map(|j| self.holds(i, j) as u8).collect())
            .collect()
    }

    pub fn n_contents(&self) -> usize {
        self.n_contents
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    #[inline]
    pub fn holds(&self, content: usize, bs: usize) -> bool {
        self.cells[bs * self.n_contents + content]
    }

    #[inline]
    pub fn set(&mut self, content: usize, bs: usize, value: bool) {
        self.cells[bs * self.n_contents + content] = value;
    }

    pub fn column(&self, bs: usize) -> &[bool] {
        &self.cells[bs * self.n_contents..(bs + 1) * self.n_contents]
    }

    pub fn column_contents(&self, bs: usize) -> impl Iterator<Item = usize> + '_ {
        self.column(bs)
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(i, _)| i)
    }

    pub fn column_len(&self, bs: usize) -> usize {
        self.column(bs).iter().filter(|&&x| x).count()
    }

    /// Column `bs` as a bitstring, content 1 first.
    pub fn column_bits(&self, bs: usize) -> alloc::string::String {
        self.column(bs).iter().map(|&x| if x { '1' } else { '0' }).collect()
    }

    /// BSs in `members` holding `content`.
    pub fn holders(&self, content: usize, members: BsSet) -> BsSet {
        members.iter().filter(|&j| self.holds(content, j)).collect()
    }

    pub fn holder_count(&self, content: usize, members: BsSet) -> usize {
        members.iter().filter(|&j| self.holds(content, j)).count()
    }

    pub(crate) fn check_dims(&self, n_contents: usize, n_bs: usize) -> Result<()> {
        if self.n_contents == n_contents && self.n_bs == n_bs {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected_contents: n_contents,
                expected_bs: n_bs,
                contents: self.n_contents,
                bs: self.n_bs,
            })
        }
    }
}

impl core::fmt::Debug for CacheMatrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_list()
            .entries((0..self.n_bs).map(|j| self.column_bits(j)))
            .finish()
    }
}

impl TryFrom<Vec<Vec<u8>>> for CacheMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<CacheMatrix> for Vec<Vec<u8>> {
    fn from(m: CacheMatrix) -> Self {
        m.to_rows()
    }
}

/// A feasible placement: every column holds exactly `cache_size` contents,
/// with `1 <= cache_size < n_contents`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "CacheMatrix", into = "CacheMatrix")]
pub struct Placement {
    matrix: CacheMatrix,
    cache_size: usize,
}

impl Placement {
    pub fn from_matrix(matrix: CacheMatrix, cache_size: usize) -> Result<Self> {
        check_cache_size(cache_size, matrix.n_contents)?;
        for j in 0..matrix.n_bs {
            let found = matrix.column_len(j);
            if found != cache_size {
                return Err(Error::ColumnSum {
                    bs: j,
                    found,
                    expected: cache_size,
                });
            }
        }
        Ok(Placement { matrix, cache_size })
    }

    /// One list of held contents per BS.
    pub fn from_columns(n_contents: usize, cache_size: usize, columns: &[Vec<usize>]) -> Result<Self> {
        let mut matrix = CacheMatrix::empty(n_contents, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for &i in col {
                if i >= n_contents {
                    return Err(Error::ContentOutOfRange {
                        content: i,
                        n_contents,
                    });
                }
                matrix.set(i, j, true);
            }
        }
        Self::from_matrix(matrix, cache_size)
    }

    /// The same column of contents at every BS.
    pub fn uniform(n_contents: usize, n_bs: usize, contents: &[usize]) -> Result<Self> {
        let columns = alloc::vec![contents.to_vec(); n_bs];
        Self::from_columns(n_contents, contents.len(), &columns)
    }

    pub fn matrix(&self) -> &CacheMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CacheMatrix {
        self.matrix
    }

    pub fn cache_size(&self) -> usize {
        self.cache_size
    }

    /// Replaces column `bs` with the given contents (exactly `cache_size` distinct).
    pub fn set_column(&mut self, bs: usize, contents: &[usize]) -> Result<()> {
        let m = self.matrix.n_contents;
        if bs >= self.matrix.n_bs {
            return Err(Error::BsOutOfRange {
                bs,
                n_bs: self.matrix.n_bs,
            });
        }
        let mut column = alloc::vec![false; m];
        for &i in contents {
            if i >= m {
                return Err(Error::ContentOutOfRange {
                    content: i,
                    n_contents: m,
                });
            }
            column[i] = true;
        }
        let found = column.iter().filter(|&&x| x).count();
        if found != self.cache_size {
            return Err(Error::ColumnSum {
                bs,
                found,
                expected: self.cache_size,
            });
        }
        for (i, v) in column.into_iter().enumerate() {
            self.matrix.set(i, bs, v);
        }
        Ok(())
    }

    /// Column update without validation; `contents` must be `cache_size`
    /// distinct in-range indices.
    pub(crate) fn overwrite_column(&mut self, bs: usize, contents: &[usize]) {
        debug_assert_eq!(contents.len(), self.cache_size);
        let m = self.matrix.n_contents;
        self.matrix.cells[bs * m..(bs + 1) * m].fill(false);
        for &i in contents {
            self.matrix.set(i, bs, true);
        }
    }
}

impl core::ops::Deref for Placement {
    type Target = CacheMatrix;

    fn deref(&self) -> &CacheMatrix {
        &self.matrix
    }
}

impl AsRef<CacheMatrix> for Placement {
    fn as_ref(&self) -> &CacheMatrix {
        &self.matrix
    }
}

impl core::fmt::Debug for Placement {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.matrix.fmt(f)
    }
}

impl TryFrom<CacheMatrix> for Placement {
    type Error = Error;

    /// Infers the cache size from the first column.
    fn try_from(matrix: CacheMatrix) -> Result<Self> {
        let k = if matrix.n_bs == 0 { 0 } else { matrix.column_len(0) };
        Self::from_matrix(matrix, k)
    }
}

impl From<Placement> for CacheMatrix {
    fn from(p: Placement) -> Self {
        p.matrix
    }
}

pub fn check_cache_size(cache_size: usize, n_contents: usize) -> Result<()> {
    if cache_size >= 1 && cache_size < n_contents {
        Ok(())
    } else {
        Err(Error::InvalidCacheSize {
            cache_size,
            n_contents,
        })
    }
}

fn check(top: &CellTopology, cat: &ContentCatalog, b: &CacheMatrix) -> Result<()> {
    b.check_dims(cat.len(), top.n_bs())
}

/// Network-wide hit rate: each request is a hit iff some covering BS holds
/// the requested content.
pub fn hit_rate(top: &CellTopology, cat: &ContentCatalog, b: &CacheMatrix) -> Result<f64> {
    check(top, cat, b)?;
    Ok(hit_rate_with(top, &cat.rates(top), b))
}

pub fn hit_rate_with<R: SegmentRates>(top: &CellTopology, rates: &R, b: &CacheMatrix) -> f64 {
    let mut total = 0.0;
    for (idx, seg) in top.segments().iter().enumerate() {
        for i in 0..b.n_contents() {
            if seg.members.iter().any(|j| b.holds(i, j)) {
                total += rates.rate(i, idx);
            }
        }
    }
    total
}

/// Hit rate seen by BS `bs` when requests are split evenly among the
/// covering BSs that hold the content.
pub fn node_hit_rate(top: &CellTopology, cat: &ContentCatalog, b: &CacheMatrix, bs: usize) -> Result<f64> {
    check(top, cat, b)?;
    top.check_bs(bs)?;
    let rates = cat.rates(top);
    Ok(top
        .segment_indices_containing(bs)
        .iter()
        .map(|&idx| segment_node_hit_rate_at(top, &rates, b, bs, idx))
        .sum())
}

/// Hit rate seen by BS `bs` from requests originating in segment `members`.
/// Segments that are not stored have zero area and contribute nothing.
pub fn segment_node_hit_rate(
    top: &CellTopology,
    cat: &ContentCatalog,
    b: &CacheMatrix,
    bs: usize,
    members: BsSet,
) -> Result<f64> {
    check(top, cat, b)?;
    top.check_bs(bs)?;
    Ok(top.segment_index(members).map_or(0.0, |idx| {
        segment_node_hit_rate_at(top, &cat.rates(top), b, bs, idx)
    }))
}

pub fn segment_node_hit_rate_at<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    b: &CacheMatrix,
    bs: usize,
    segment: usize,
) -> f64 {
    let members = top.segment(segment).members;
    if !members.contains(bs) {
        return 0.0;
    }
    (0..b.n_contents())
        .filter(|&i| b.holds(i, bs))
        .map(|i| {
            let sharing = b.holder_count(i, members).max(1);
            rates.rate(i, segment) / sharing as f64
        })
        .sum()
}

/// The part of the network hit rate that depends on column `bs`: the sum of
/// per-segment node hit rates over neighbors of `bs` and segments covered
/// by `bs`.
pub fn local_energy(top: &CellTopology, cat: &ContentCatalog, a: &CacheMatrix, bs: usize) -> Result<f64> {
    check(top, cat, a)?;
    local_energy_with(top, &cat.rates(top), a, bs)
}

pub fn local_energy_with<R: SegmentRates>(
    top: &CellTopology,
    rates: &R,
    a: &CacheMatrix,
    bs: usize,
) -> Result<f64> {
    let neighbors = top.neighbors(bs)?;
    let mut total = 0.0;
    for n in neighbors.iter() {
        for &idx in top.segment_indices_containing(bs) {
            total += segment_node_hit_rate_at(top, rates, a, n, idx);
        }
    }
    Ok(total)
}

/// Per-(segment, content) holder counts, maintained incrementally under
/// single-column updates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCounts {
    n_contents: usize,
    counts: Vec<u32>,
}

impl CoverageCounts {
    pub fn new(top: &CellTopology, b: &CacheMatrix) -> Self {
        let m = b.n_contents();
        let mut counts = alloc::vec![0u32; top.segments().len() * m];
        for (idx, seg) in top.segments().iter().enumerate() {
            for i in 0..m {
                counts[idx * m + i] = b.holder_count(i, seg.members) as u32;
            }
        }
        CoverageCounts { n_contents: m, counts }
    }

    #[inline]
    pub fn count(&self, segment: usize, content: usize) -> u32 {
        self.counts[segment * self.n_contents + content]
    }

    /// Updates counts after column `bs` changed from `old` to `new`.
    pub fn apply_column_change(&mut self, top: &CellTopology, bs: usize, old: &[bool], new: &[bool]) {
        let m = self.n_contents;
        for &idx in top.segment_indices_containing(bs) {
            let row = &mut self.counts[idx * m..(idx + 1) * m];
            for i in 0..m {
                match (old[i], new[i]) {
                    (true, false) => row[i] -= 1,
                    (false, true) => row[i] += 1,
                    _ => {}
                }
            }
        }
    }
}
