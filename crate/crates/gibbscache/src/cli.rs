//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{parse_config_with, Experiment, Overrides};
use crate::error::{Error, Result};
use crate::output::{write_json, write_table, Format};
use crate::report;

#[derive(Debug, Parser)]
#[command(name = "gibbscache", version, about = "Gibbs-sampling cache placement experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate all placements; print the optimum and the baselines.
    Optimal(Args),
    /// Run the coupled virtual/real simulation.
    Simulate(Args),
    /// Exact and simulated expected hit rate over a grid of fixed β.
    SweepBeta(Args),
    /// Gibbs, independent and most-popular curves over the β grid.
    ReproduceFig2(Args),
}

#[derive(Debug, Clone, clap::Args)]
pub struct Args {
    /// Config file (same as --config).
    #[arg(value_name = "CONFIG")]
    pub config_path: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Args {
    fn load(&self) -> Result<Experiment> {
        let path = match (&self.config_path, &self.config) {
            (Some(p), None) | (None, Some(p)) => p,
            (Some(_), Some(_)) => {
                return Err(Error::invalid("--config", "config given twice", "pass the file either positionally or with --config"))
            }
            (None, None) => return Err(Error::invalid("--config", "no config file", "pass a config file path")),
        };
        parse_config_with(
            path,
            &Overrides {
                seed: self.seed,
                replications: self.replications,
                horizon: self.horizon,
            },
        )
    }
}

fn print_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Optimal(args) => {
            let exp = args.load()?;
            let report = report::optimal_report(&exp)?;
            if let Some(dir) = &args.out_dir {
                write_json(&dir.join("optimal.json"), &report)?;
            }
            print_json(out, &report)
        }
        Command::Simulate(args) => {
            let exp = args.load()?;
            let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            let (summary, tables) = report::simulate(&exp)?;
            write_json(&dir.join("summary.json"), &summary)?;
            for (k, t) in tables.iter().enumerate() {
                let rep = rep_dir(&dir, k);
                if exp.sim.record.events {
                    write_table(&rep, "events", args.format, &t.events)?;
                }
                if exp.sim.record.slots {
                    write_table(&rep, "slots", args.format, &t.slots)?;
                }
                if !t.estimates.is_empty() {
                    write_table(&rep, "estimates", args.format, &t.estimates)?;
                }
            }
            writeln!(
                out,
                "{} replication(s), time-average hit rate {:.6} (stderr {:.6}); wrote {}",
                summary.replications,
                summary.time_average_hit_rate.mean,
                summary.time_average_hit_rate.stderr,
                dir.display()
            )
            .map_err(|e| Error::io("<stdout>", e))
        }
        Command::SweepBeta(args) => {
            let exp = args.load()?;
            let rows = report::sweep_beta(&exp)?;
            if let Some(dir) = &args.out_dir {
                write_table(dir, "sweep", args.format, &rows)?;
            }
            print_json(out, &rows)
        }
        Command::ReproduceFig2(args) => {
            let exp = args.load()?;
            let rows = report::reproduce_fig2(&exp)?;
            if let Some(dir) = &args.out_dir {
                write_table(dir, "fig2", args.format, &rows)?;
            }
            print_json(out, &rows)
        }
    }
}

/// Directory holding the tables of replication `k`.
pub fn rep_dir(out_dir: &Path, k: usize) -> PathBuf {
    out_dir.join(format!("rep-{k:03}"))
}
