//! CSV tables and the JSON run summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::experiments::{
    BetaRow, ConvergenceReport, CorollaryReport, Lemma1Row, LimitCurves, SandwichRow, ThresholdRow,
};
use crate::error::{Error, Result};
use crate::seed;
use crate::sim::{Summary, Trajectory};

/// One CSV file: a header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Split CSV produced by one of the crate's writers back into cells.
    fn from_csv(name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Self {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory");
        let text = String::from_utf8(buf).expect("ascii csv");
        let mut lines = text.lines();
        let split = |l: &str| l.split(',').map(String::from).collect::<Vec<_>>();
        let header = lines.next().map(split).unwrap_or_default();
        Self {
            name: name.to_string(),
            header,
            rows: lines.map(split).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// Tables plus free-form notes for the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub tables: Vec<Table>,
    pub notes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub master_seed: u64,
    pub derivation: String,
    pub tags: BTreeMap<String, u64>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: SeedInfo,
    pub files: Vec<String>,
    pub notes: BTreeMap<String, Value>,
}

fn seed_info(master_seed: u64) -> SeedInfo {
    let tags = [
        ("graph", seed::TAG_GRAPH),
        ("weights", seed::TAG_WEIGHTS),
        ("init", seed::TAG_INIT),
        ("dynamics", seed::TAG_DYNAMICS),
        ("beta", seed::TAG_BETA),
        ("sandwich", seed::TAG_SANDWICH),
        ("threshold", seed::TAG_THRESHOLD),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    SeedInfo {
        master_seed,
        derivation: "splitmix64 chain over [tag, n, replicate]; sandwich and threshold streams use [purpose, tag, n, replicate]".into(),
        tags,
    }
}

/// Write every table as `<name>.csv` and a `summary.json` into `dir`.
/// Output depends only on the inputs: no timestamps, fixed row order.
pub fn emit_reports(report: &Report, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for table in &report.tables {
        let path = dir.join(table.file_name());
        fs::write(&path, table.to_csv()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let summary = RunSummary {
        command: report.command.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        seeds: seed_info(cfg.master_seed),
        files: report.tables.iter().map(Table::file_name).collect(),
        notes: report.notes.clone(),
    };
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

pub fn load_summary(path: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn f(x: f64) -> String {
    x.to_string()
}

fn summary_cells(s: &Summary) -> [String; 2] {
    [f(s.mean), f(s.std)]
}

pub fn trajectory_report(traj: &Trajectory) -> Report {
    Report {
        command: "simulate".into(),
        tables: vec![Table::from_csv("trajectory", |w| traj.write_csv(w))],
        notes: BTreeMap::from([
            ("n".into(), json!(traj.n)),
            ("events".into(), json!(traj.event_count)),
        ]),
    }
}

pub fn limit_report(curves: &LimitCurves) -> Report {
    Report {
        command: "limit".into(),
        tables: vec![Table::from_csv("limit", |w| curves.solution.write_csv(w))],
        notes: BTreeMap::from([
            ("lambda_c".into(), json!(curves.lambda_c)),
            ("gap_psi_component".into(), json!(curves.gap_psi_component)),
            ("gap_psi_time_change".into(), json!(curves.gap_psi_time_change)),
            ("gap_component_time_change".into(), json!(curves.gap_component_time_change)),
        ]),
    }
}

fn lemma1_table(rows: &[Lemma1Row]) -> Table {
    let mut table = Table::new(
        "lemma1",
        &["n", "t", "class", "weight", "bound", "threshold", "satisfied", "replicates", "fraction"],
    );
    for r in rows {
        table.push(vec![
            r.n.to_string(),
            f(r.t),
            r.class.to_string(),
            f(r.weight),
            r.bound.label().into(),
            f(r.threshold),
            r.satisfied.to_string(),
            r.replicates.to_string(),
            f(r.fraction),
        ]);
    }
    table
}

fn beta_table(rows: &[BetaRow]) -> Table {
    let mut table = Table::new("beta", &["n", "p", "c", "d", "trials", "beta", "beta_over_n2"]);
    for r in rows {
        table.push(vec![
            r.n.to_string(),
            f(r.p),
            f(r.c),
            f(r.d),
            r.trials.to_string(),
            f(r.beta),
            f(r.beta_over_n2),
        ]);
    }
    table
}

pub fn convergence_report(rep: &ConvergenceReport) -> Report {
    let mut rows = Table::new(
        "converge",
        &["n", "t", "mean_S", "std_S", "mean_V", "std_V", "H_S", "H_V", "err_S", "err_V", "discrepancy"],
    );
    for r in &rep.rows {
        rows.push(vec![
            r.n.to_string(),
            f(r.t),
            f(r.s_mean),
            f(r.s_std),
            f(r.v_mean),
            f(r.v_std),
            f(r.hs),
            f(r.hv),
            f(r.err_s),
            f(r.err_v),
            f(r.discrepancy),
        ]);
    }
    let mut by_n = Table::new("converge_by_n", &["n", "max_err_S", "max_err_V", "mean_err_S"]);
    for s in &rep.summary {
        by_n.push(vec![s.n.to_string(), f(s.max_err_s), f(s.max_err_v), f(s.mean_err_s)]);
    }
    let mut tables = vec![rows, by_n];
    if !rep.lemma1.is_empty() {
        tables.push(lemma1_table(&rep.lemma1));
    }
    tables.push(beta_table(&rep.beta));
    Report {
        command: "converge".into(),
        tables,
        notes: BTreeMap::from([(
            "lemma1_grid".into(),
            json!("infimum over time evaluated on the observation grid"),
        )]),
    }
}

pub fn corollary_report(rep: &CorollaryReport) -> Report {
    let mut rows = Table::new("corollary", &["n", "t", "mean", "std", "max"]);
    for r in &rep.rows {
        rows.push(vec![r.n.to_string(), f(r.t), f(r.mean), f(r.std), f(r.max)]);
    }
    let mut sup = Table::new("corollary_sup", &["n", "mean_sup", "std_sup", "max_sup"]);
    for s in &rep.sup {
        sup.push(vec![s.n.to_string(), f(s.sup.mean), f(s.sup.std), f(s.sup.max)]);
    }
    Report {
        command: "corollary".into(),
        tables: vec![rows, sup],
        notes: BTreeMap::new(),
    }
}

pub fn lemma1_report(rows: &[Lemma1Row]) -> Report {
    Report {
        command: "lemma1".into(),
        tables: vec![lemma1_table(rows)],
        notes: BTreeMap::from([(
            "grid".into(),
            json!("infimum over time evaluated on the observation grid"),
        )]),
    }
}

pub fn sandwich_report(rows: &[SandwichRow]) -> Report {
    let mut table = Table::new(
        "sandwich",
        &[
            "n", "m", "t", "mean_S_lower", "std_S_lower", "mean_S", "std_S", "mean_S_upper",
            "std_S_upper", "mean_V_lower", "std_V_lower", "mean_V", "std_V", "mean_V_upper",
            "std_V_upper", "S_ordered", "V_ordered", "gap_S",
        ],
    );
    for r in rows {
        let mut row = vec![r.n.to_string(), r.m.to_string(), f(r.t)];
        for s in [&r.s_lower, &r.s_exact, &r.s_upper, &r.v_lower, &r.v_exact, &r.v_upper] {
            row.extend(summary_cells(s));
        }
        row.extend([r.s_ordered.to_string(), r.v_ordered.to_string(), f(r.gap_s)]);
        table.push(row);
    }
    Report {
        command: "sandwich".into(),
        tables: vec![table],
        notes: BTreeMap::new(),
    }
}

pub fn threshold_report(rows: &[ThresholdRow]) -> Report {
    let mut table = Table::new(
        "threshold",
        &["n", "lambda", "lambda_over_lambda_c", "mean_final_S", "std_final_S", "critical"],
    );
    for r in rows {
        let mut row = vec![r.n.to_string(), f(r.lambda), f(r.ratio)];
        row.extend(summary_cells(&r.final_s));
        row.push(if r.critical { "*".into() } else { String::new() });
        table.push(row);
    }
    Report {
        command: "threshold".into(),
        tables: vec![table],
        notes: BTreeMap::new(),
    }
}

pub fn beta_report(rows: &[BetaRow]) -> Report {
    Report {
        command: "beta".into(),
        tables: vec![beta_table(rows)],
        notes: BTreeMap::new(),
    }
}
