//! Command-line front end shared by the `wsir` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{load_config, ExperimentConfig};
use super::experiments as exp;
use super::report::{self, emit_reports, Report};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "wsir", version, about = "Weighted SIR epidemics on G(n, p)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Args)]
pub struct SharedArgs {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override `master_seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Override the replicate count.
    #[arg(long, global = true, value_name = "N")]
    pub replicates: Option<usize>,
    /// Override the limit-solver tolerance.
    #[arg(long, global = true, value_name = "REAL")]
    pub tol: Option<f64>,
    /// Share one graph per n across replicates.
    #[arg(long, global = true)]
    pub fixed_graph: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One trajectory at the first n.
    Simulate,
    /// Limit curves on [0, last observation time].
    Limit,
    /// Law-of-large-numbers study over n_list.
    Converge,
    /// Cross-edge discrepancy table.
    Corollary,
    /// Per-class lower-bound satisfaction fractions.
    Lemma1 {
        #[arg(long, value_name = "REAL")]
        t: Option<f64>,
    },
    /// Ordered means under lower/upper weight discretizations.
    Sandwich {
        #[arg(long, value_delimiter = ',', value_name = "M,..")]
        m: Option<Vec<u32>>,
    },
    /// Final susceptible fraction across infection rates.
    Threshold {
        #[arg(long, value_delimiter = ',', value_name = "LAMBDA,..")]
        lambda: Option<Vec<f64>>,
    },
    /// Sampled cross-edge deviation beta(c, d, n).
    Beta,
}

impl SharedArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let path = self.config.as_ref().ok_or_else(|| {
            crate::Error::Invalid("--config PATH is required".into())
        })?;
        let mut cfg = load_config(path)?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if self.fixed_graph {
            cfg.fixed_graph = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Run one subcommand and write its reports. Returns the written paths.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = cli.shared.resolve()?;
    let report: Report = match &cli.command {
        Command::Simulate => report::trajectory_report(&exp::simulate_once(&cfg)?),
        Command::Limit => report::limit_report(&exp::limit_curves(&cfg)?),
        Command::Converge => report::convergence_report(&exp::lln_experiment(&cfg)?),
        Command::Corollary => report::corollary_report(&exp::corollary_check(&cfg)?),
        Command::Lemma1 { t } => {
            report::lemma1_report(&exp::lemma1_check(&cfg, t.unwrap_or(cfg.lemma_t))?)
        }
        Command::Sandwich { m } => {
            let m_list = m.clone().unwrap_or_else(|| cfg.m_list.clone());
            report::sandwich_report(&exp::sandwich_experiment(&cfg, &m_list)?)
        }
        Command::Threshold { lambda } => {
            let grid = lambda.clone().unwrap_or_else(|| cfg.lambda_grid.clone());
            report::threshold_report(&exp::threshold_sweep(&cfg, &grid)?)
        }
        Command::Beta => report::beta_report(&exp::beta_trend(&cfg)?),
    };
    emit_reports(&report, &cfg, &cfg.out_dir)
}
