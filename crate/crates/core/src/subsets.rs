//! K-subset enumeration and the placement space built from it.

use alloc::vec::Vec;

use crate::model::{check_cache_size, Placement};
use crate::{Error, Result};

/// `n choose k`, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Lexicographic cursor over the k-subsets of `0..n`.
///
/// Starts at `[0, 1, .., k-1]`; [`advance`](Self::advance) moves to the next
/// subset in place and returns `false` once the last one has been passed.
#[derive(Debug, Clone)]
pub struct KSubsets {
    n: usize,
    current: Vec<usize>,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        debug_assert!(k <= n);
        KSubsets {
            n,
            current: (0..k).collect(),
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.current
    }

    pub fn advance(&mut self) -> bool {
        let k = self.current.len();
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if self.current[pos] < self.n - k + pos {
                self.current[pos] += 1;
                for q in pos + 1..k {
                    self.current[q] = self.current[q - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    pub fn reset(&mut self) {
        for (q, x) in self.current.iter_mut().enumerate() {
            *x = q;
        }
    }

    /// Collects every subset in order.
    pub fn all(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut cursor = KSubsets::new(n, k);
        let mut out = Vec::new();
        loop {
            out.push(cursor.current.clone());
            if !cursor.advance() {
                return out;
            }
        }
    }
}

/// The set of all feasible placements for `n_bs` caches of size `cache_size`
/// over `n_contents` contents, enumerated in mixed-radix order (column 0 is
/// the most significant digit, each digit indexes the lexicographic
/// k-subsets).
#[derive(Debug, Clone)]
pub struct PlacementSpace {
    n_contents: usize,
    n_bs: usize,
    cache_size: usize,
    columns: Vec<Vec<usize>>,
    size: u64,
}

impl PlacementSpace {
    pub fn new(n_contents: usize, n_bs: usize, cache_size: usize, limit: u64) -> Result<Self> {
        check_cache_size(cache_size, n_contents)?;
        let per_column = binomial(n_contents, cache_size).unwrap_or(u128::MAX);
        let total = (0..n_bs).try_fold(1u128, |acc, _| acc.checked_mul(per_column));
        match total {
            Some(total) if total <= limit as u128 => Ok(PlacementSpace {
                n_contents,
                n_bs,
                cache_size,
                columns: KSubsets::all(n_contents, cache_size),
                size: total as u64,
            }),
            _ => Err(Error::Capacity {
                what: "placement space",
                count: total.unwrap_or(u128::MAX),
                limit,
            }),
        }
    }

    pub fn len(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, digit: usize) -> &[usize] {
        &self.columns[digit]
    }

    /// Placement with mixed-radix index `index`.
    pub fn placement(&self, index: u64) -> Placement {
        let radix = self.columns.len() as u64;
        let mut digits = alloc::vec![0usize; self.n_bs];
        let mut rest = index;
        for j in (0..self.n_bs).rev() {
            digits[j] = (rest % radix) as usize;
            rest /= radix;
        }
        let cols: Vec<Vec<usize>> = digits.iter().map(|&d| self.columns[d].clone()).collect();
        Placement::from_columns(self.n_contents, self.cache_size, &cols)
            .expect("enumerated columns are feasible")
    }

    /// Mixed-radix index of `p` (which must belong to this space).
    pub fn index_of(&self, p: &Placement) -> Option<u64> {
        if p.n_contents() != self.n_contents || p.n_bs() != self.n_bs || p.cache_size() != self.cache_size {
            return None;
        }
        let radix = self.columns.len() as u64;
        let mut index = 0u64;
        let mut col = Vec::with_capacity(self.cache_size);
        for j in 0..self.n_bs {
            col.clear();
            col.extend(p.column_contents(j));
            let digit = self.columns.binary_search(&col).ok()?;
            index = index * radix + digit as u64;
        }
        Some(index)
    }

    /// Streams every placement in index order.
    pub fn iter(&self) -> impl Iterator<Item = Placement> + '_ {
        (0..self.size).map(move |idx| self.placement(idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), Some(6));
        assert_eq!(binomial(2, 3), Some(0));
        assert_eq!(binomial(60, 30), Some(118264581564861424));
    }

    #[test]
    fn lexicographic_subsets() {
        let all = KSubsets::all(4, 2);
        assert_eq!(
            all,
            [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]].map(|a| a.to_vec())
        );
        assert_eq!(KSubsets::all(3, 3).len(), 1);
    }

    #[test]
    fn placement_space_round_trip() {
        let space = PlacementSpace::new(4, 2, 2, 1000).unwrap();
        assert_eq!(space.len(), 36);
        for (idx, p) in space.iter().enumerate() {
            assert_eq!(space.index_of(&p), Some(idx as u64));
        }
    }

    #[test]
    fn placement_space_limit() {
        assert!(matches!(
            PlacementSpace::new(10, 3, 5, 1000),
            Err(Error::Capacity { count: 16_003_008, .. })
        ));
    }
}
