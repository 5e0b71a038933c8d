//! File formats, experiment configuration, concurrent replications and the
//! command-line front end for [`gibbscache_core`].

pub mod cli;
pub mod config;
mod error;
pub mod output;
pub mod replicate;
pub mod report;

pub use error::{Error, Result};
pub use gibbscache_core as core;
