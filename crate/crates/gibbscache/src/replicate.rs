//! Independent replications fanned out over a thread pool.

use gibbscache_core::rng::replication_seed;
use rayon::prelude::*;

use crate::error::Result;

/// Runs `job` once per replication with seeds derived from `seed`. Results
/// come back in replication order regardless of scheduling.
pub fn replicate<T, F>(seed: u64, replications: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    (0..replications)
        .into_par_iter()
        .map(|k| job(k, replication_seed(seed, k as u64)))
        .collect()
}

/// Sample mean and standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_and_deterministic() {
        let a = replicate(5, 16, |k, s| Ok((k, s))).unwrap();
        assert_eq!(a, replicate(5, 16, |k, s| Ok((k, s))).unwrap());
        assert!(a.iter().enumerate().all(|(i, &(k, _))| i == k));
    }

    #[test]
    fn errors_propagate() {
        let r = replicate(0, 4, |k, _| {
            if k == 2 {
                Err(gibbscache_core::Error::EmptyWindow.into())
            } else {
                Ok(k)
            }
        });
        assert!(r.is_err());
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_stderr(&[4.0]), (4.0, 0.0));
    }
}
