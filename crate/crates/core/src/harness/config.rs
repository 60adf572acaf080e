//! Line-oriented `key = value` experiment configuration.
//!
//! ```text
//! # reference study
//! dist = 1:0.5, 2:0.5
//! theta = 0.2
//! p = 0.1
//! lambda = 3
//! n_list = 500, 2000, 8000
//! replicates = 50
//! obs_times = 0:0.05:2      # start:step:end, or an explicit list
//! master_seed = 20240601
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit::{LimitParams, DEFAULT_TOL};
use crate::sim::ModelParams;
use crate::weights::WeightDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dist: WeightDistribution,
    pub theta: f64,
    pub p: f64,
    pub lambda: f64,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub obs_times: Vec<f64>,
    pub master_seed: u64,
    pub tol: f64,
    pub out_dir: PathBuf,
    /// Share one graph per `n` across replicates instead of resampling.
    pub fixed_graph: bool,
    /// Complete-graph fixture; requires `p = 1`.
    pub all_edges: bool,
    /// Horizon for the lower-bound check on per-class counts.
    pub lemma_t: f64,
    pub m_list: Vec<u32>,
    /// Continuous weight source `Uniform(a, b)` for the sandwich study.
    pub rho_uniform: Option<(f64, f64)>,
    /// Infection rates for the threshold sweep; empty means multiples of the
    /// critical value.
    pub lambda_grid: Vec<f64>,
    pub beta_c: f64,
    pub beta_d: f64,
    pub beta_trials: usize,
    /// Grid spacing of exported limit curves.
    pub limit_step: f64,
}

const KNOWN_KEYS: &[&str] = &[
    "dist",
    "theta",
    "p",
    "lambda",
    "n_list",
    "replicates",
    "obs_times",
    "master_seed",
    "tol",
    "out",
    "fixed_graph",
    "all_edges",
    "lemma_t",
    "m_list",
    "rho_uniform",
    "lambda_grid",
    "beta_c",
    "beta_d",
    "beta_trials",
    "limit_step",
];

const REQUIRED_KEYS: &[&str] = &["dist", "theta", "p", "lambda", "n_list", "obs_times"];

struct Entries {
    values: HashMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, text)) => text.parse::<T>().map(Some).map_err(|_| Error::Config {
                line,
                message: format!("cannot parse `{text}` as a value for `{key}`"),
            }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((line, text)) = self.raw(key) else {
            return Ok(None);
        };
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                item.parse::<T>().map_err(|_| Error::Config {
                    line,
                    message: format!("cannot parse `{item}` in `{key}`"),
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some((_, "true" | "yes" | "1")) => Ok(true),
            Some((_, "false" | "no" | "0")) => Ok(false),
            Some((line, other)) => Err(Error::Config {
                line,
                message: format!("`{key}` must be true or false, got `{other}`"),
            }),
        }
    }
}

fn parse_times(line: usize, text: &str) -> Result<Vec<f64>> {
    let bad = |message: String| Error::Config { line, message };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [start, step, end] = parts.as_slice() else {
            return Err(bad(format!("time range must be start:step:end, got `{text}`")));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}` in `{text}`")));
        let (start, step, end) = (num(start)?, num(step)?, num(end)?);
        if !(step > 0.0) || end < start {
            return Err(bad(format!("empty or invalid time range `{text}`")));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| start + step * i as f64).collect())
    } else {
        text.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad time `{s}`"))))
            .collect()
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            }
            if let Some((first, _)) = values.insert(key.clone(), (line_no, value.trim().to_string())) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
        }
        let entries = Entries { values };
        for key in REQUIRED_KEYS {
            if entries.raw(key).is_none() {
                return Err(Error::Invalid(format!("missing required key `{key}`")));
            }
        }

        let (dist_line, dist_text) = entries.raw("dist").unwrap();
        let dist = WeightDistribution::parse_spec(dist_text).map_err(|e| Error::Config {
            line: dist_line,
            message: e.to_string(),
        })?;
        let (times_line, times_text) = entries.raw("obs_times").unwrap();
        let obs_times = parse_times(times_line, times_text)?;
        let rho_uniform = match entries.list::<f64>("rho_uniform")? {
            None => None,
            Some(v) if v.len() == 2 => Some((v[0], v[1])),
            Some(_) => {
                return Err(Error::Config {
                    line: entries.line("rho_uniform"),
                    message: "`rho_uniform` takes two numbers `a, b`".into(),
                })
            }
        };

        let cfg = Self {
            dist,
            theta: entries.parse("theta")?.unwrap(),
            p: entries.parse("p")?.unwrap(),
            lambda: entries.parse("lambda")?.unwrap(),
            n_list: entries.list("n_list")?.unwrap(),
            replicates: entries.parse("replicates")?.unwrap_or(20),
            obs_times,
            master_seed: entries.parse("master_seed")?.unwrap_or(1),
            tol: entries.parse("tol")?.unwrap_or(DEFAULT_TOL),
            out_dir: entries
                .raw("out")
                .map(|(_, s)| PathBuf::from(s))
                .unwrap_or_else(|| PathBuf::from("out")),
            fixed_graph: entries.flag("fixed_graph")?,
            all_edges: entries.flag("all_edges")?,
            lemma_t: entries.parse("lemma_t")?.unwrap_or(1.0),
            m_list: entries.list("m_list")?.unwrap_or_else(|| vec![1, 4, 16]),
            rho_uniform,
            lambda_grid: entries.list("lambda_grid")?.unwrap_or_default(),
            beta_c: entries.parse("beta_c")?.unwrap_or(0.25),
            beta_d: entries.parse("beta_d")?.unwrap_or(0.25),
            beta_trials: entries.parse("beta_trials")?.unwrap_or(200),
            limit_step: entries.parse("limit_step")?.unwrap_or(0.01),
        };
        cfg.validate().map_err(|e| match e {
            Error::Invalid(message) => {
                let key = KNOWN_KEYS
                    .iter()
                    .find(|k| message.starts_with(&format!("{k} ")))
                    .copied();
                match key.map(|k| entries.line(k)) {
                    Some(line) if line > 0 => Error::Config { line, message },
                    _ => Error::Invalid(message),
                }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    /// Check every invariant. Messages start with the offending key.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invalid(msg));
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return fail("theta must lie strictly in (0,1)".into());
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.all_edges {
            if self.p != 1.0 {
                return fail("p must equal 1 for the all_edges fixture".into());
            }
        } else if !(self.p > 0.0 && self.p < 1.0) {
            return fail(format!("p must lie strictly in (0,1), got {}", self.p));
        }
        if self.n_list.is_empty() {
            return fail("n_list must be nonempty".into());
        }
        if self.n_list[0] == 0 {
            return fail("n_list entries must be at least 1".into());
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return fail("n_list must be strictly increasing".into());
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.obs_times.is_empty() {
            return fail("obs_times must be nonempty".into());
        }
        if !(self.obs_times[0] >= 0.0) || self.obs_times.iter().any(|t| !t.is_finite()) {
            return fail("obs_times must be finite and nonnegative".into());
        }
        if self.obs_times.windows(2).any(|w| w[1] <= w[0]) {
            return fail("obs_times must be strictly increasing".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return fail(format!("tol must lie in (0,1), got {}", self.tol));
        }
        if !(self.lemma_t > 0.0) {
            return fail(format!("lemma_t must be positive, got {}", self.lemma_t));
        }
        if self.m_list.iter().any(|&m| m == 0) {
            return fail("m_list entries must be at least 1".into());
        }
        if let Some((a, b)) = self.rho_uniform {
            if !(a >= 0.0 && b > a && b.is_finite()) {
                return fail(format!("rho_uniform must satisfy 0 <= a < b, got ({a}, {b})"));
            }
        }
        if self.lambda_grid.iter().any(|&l| !(l > 0.0)) {
            return fail("lambda_grid entries must be positive".into());
        }
        if !(self.beta_c > 0.0 && self.beta_d > 0.0 && self.beta_c + self.beta_d <= 1.0) {
            return fail("beta_c and beta_d must be positive with beta_c + beta_d <= 1".into());
        }
        if !(self.limit_step > 0.0) {
            return fail("limit_step must be positive".into());
        }
        Ok(())
    }

    pub fn model_params(&self, n: usize) -> Result<ModelParams> {
        ModelParams::new(n, self.p, self.lambda, self.theta)
    }

    pub fn limit_params(&self) -> Result<LimitParams> {
        LimitParams::new(self.dist.clone(), self.theta, self.p, self.lambda)
    }

    /// Render back to the config syntax; parsing the result gives `self` again.
    pub fn to_config_string(&self) -> String {
        let join = |xs: Vec<String>| xs.join(", ");
        let mut out = vec![
            format!("dist = {}", self.dist.to_spec_string()),
            format!("theta = {}", self.theta),
            format!("p = {}", self.p),
            format!("lambda = {}", self.lambda),
            format!("n_list = {}", join(self.n_list.iter().map(|n| n.to_string()).collect())),
            format!("replicates = {}", self.replicates),
            format!("obs_times = {}", join(self.obs_times.iter().map(|t| t.to_string()).collect())),
            format!("master_seed = {}", self.master_seed),
            format!("tol = {}", self.tol),
            format!("out = {}", self.out_dir.display()),
            format!("fixed_graph = {}", self.fixed_graph),
            format!("all_edges = {}", self.all_edges),
            format!("lemma_t = {}", self.lemma_t),
            format!("m_list = {}", join(self.m_list.iter().map(|m| m.to_string()).collect())),
            format!("beta_c = {}", self.beta_c),
            format!("beta_d = {}", self.beta_d),
            format!("beta_trials = {}", self.beta_trials),
            format!("limit_step = {}", self.limit_step),
        ];
        if let Some((a, b)) = self.rho_uniform {
            out.push(format!("rho_uniform = {a}, {b}"));
        }
        if !self.lambda_grid.is_empty() {
            out.push(format!(
                "lambda_grid = {}",
                join(self.lambda_grid.iter().map(|l| l.to_string()).collect())
            ));
        }
        out.join("\n") + "\n"
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::parse(&text)
}
