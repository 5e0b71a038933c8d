//! Distributed cache placement for networks of base stations with
//! overlapping coverage cells.
//!
//! The crate is organised bottom-up:
//!
//!  * [`geometry`] reduces cell shapes to a measure over coverage segments.
//!  * [`model`] holds catalogs, cache matrices and the exact hit-rate algebra.
//!  * [`gibbs`] is the virtual-cache Markov chain (fixed or annealed inverse
//!    temperature) plus exact small-instance diagnostics.
//!  * [`realcache`] applies request-driven updates to the serving caches.
//!  * [`traffic`] generates Poisson requests, routes them to a serving BS, and
//!    learns per-segment request rates on-line.
//!  * [`oracle`] enumerates every placement for ground truth and baselines.
//!  * [`sim`] couples all of the above on one continuous clock.
//!
//! Everything here is `no_std` (with `alloc`); file formats, the CLI and
//! concurrent replications live in the companion `gibbscache` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
#[macro_use]
extern crate std;

mod error;
pub mod geometry;
pub mod gibbs;
pub mod model;
pub mod oracle;
pub mod realcache;
pub mod rng;
pub mod sim;
pub mod subsets;
pub mod traffic;

pub use error::{Error, Result};
pub use geometry::{BsSet, CellTopology, Segment};
pub use model::{CacheMatrix, ContentCatalog, Placement, SegmentRates, TrueRates};
