//! Experiment orchestration: configuration files, replicate studies,
//! lemma and corollary checks, and CSV/JSON report emission.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::{load_config, ExperimentConfig};
pub use experiments::{
    beta_trend, corollary_check, lemma1_check, limit_curves, lln_experiment, run_study,
    sandwich_experiment, simulate_once, threshold_sweep, ConvergenceReport, Study,
};
pub use report::{emit_reports, load_summary, Report, RunSummary, Table};
