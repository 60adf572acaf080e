//! Experiment drivers. Each returns a plain result struct; turning results
//! into files is the job of [`super::report`].

use rand::distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::graph::{estimate_beta, generate_er, Graph};
use crate::limit::{
    lambda_critical, solve_component_ode, solve_psi, solve_time_change, uniform_grid, LimitSolution,
};
use crate::seed::{
    derive_seed, rng_from_seed, TAG_BETA, TAG_DYNAMICS, TAG_GRAPH, TAG_INIT, TAG_SANDWICH,
    TAG_THRESHOLD, TAG_WEIGHTS,
};
use crate::sim::{
    init_states, replicate_trajectories, simulate, simulate_with, Engine, GraphSource, ModelParams,
    Recording, ReplicateStats, Snapshot, Summary, Trajectory,
};
use crate::weights::{discretize, sample_assignment, Rounding, WeightAssignment};

/// Slack when matching a requested time against the observation grid.
const GRID_EPS: f64 = 1e-9;

/// The graph shared by all replicates at size `n`, if any.
pub fn shared_graph(cfg: &ExperimentConfig, n: usize) -> Result<Option<Graph>> {
    if cfg.all_edges {
        Ok(Some(Graph::complete(n)))
    } else if cfg.fixed_graph {
        generate_er(n, cfg.p, derive_seed(cfg.master_seed, &[TAG_GRAPH, n as u64])).map(Some)
    } else {
        Ok(None)
    }
}

fn graph_for_replicate<'g>(
    cfg: &ExperimentConfig,
    shared: &'g Option<Graph>,
    owned: &'g mut Option<Graph>,
    n: usize,
    seed: u64,
) -> Result<&'g Graph> {
    match shared {
        Some(g) => Ok(g),
        None => Ok(owned.insert(generate_er(n, cfg.p, seed)?)),
    }
}

/// One trajectory at the first `n` of the configuration, replicate 0.
pub fn simulate_once(cfg: &ExperimentConfig) -> Result<Trajectory> {
    let n = cfg.n_list[0];
    let params = cfg.model_params(n)?;
    let key = |tag| derive_seed(cfg.master_seed, &[tag, n as u64, 0]);
    let shared = shared_graph(cfg, n)?;
    let mut owned = None;
    let g = graph_for_replicate(cfg, &shared, &mut owned, n, key(TAG_GRAPH))?;
    let w = sample_assignment(&cfg.dist, n, key(TAG_WEIGHTS));
    let init = init_states(n, cfg.theta, key(TAG_INIT));
    simulate(g, &w, &params, &init, &cfg.obs_times, key(TAG_DYNAMICS))
}

/// Limit curves on `[0, last obs time]` plus the pairwise sup-norm gaps
/// between the three solution routes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCurves {
    pub solution: LimitSolution,
    pub lambda_c: f64,
    pub gap_psi_component: f64,
    pub gap_psi_time_change: f64,
    pub gap_component_time_change: f64,
}

/// Largest absolute difference between two solutions over `hs`, `hv`, `psi`
/// and the per-class susceptible curves.
pub fn sup_gap(a: &LimitSolution, b: &LimitSolution) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.times.len() {
        worst = worst
            .max((a.hs[i] - b.hs[i]).abs())
            .max((a.hv[i] - b.hv[i]).abs())
            .max((a.psi[i] - b.psi[i]).abs());
        for (x, y) in a.s_by_class[i].iter().zip(&b.s_by_class[i]) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

pub fn limit_curves(cfg: &ExperimentConfig) -> Result<LimitCurves> {
    let lp = cfg.limit_params()?;
    let t_end = *cfg.obs_times.last().unwrap();
    let grid = if t_end > 0.0 {
        uniform_grid(t_end, cfg.limit_step)
    } else {
        vec![0.0]
    };
    let a = solve_psi(&lp, &grid, cfg.tol)?;
    let b = solve_component_ode(&lp, &grid, cfg.tol)?;
    let c = solve_time_change(&lp, &grid, cfg.tol)?;
    Ok(LimitCurves {
        lambda_c: lambda_critical(&cfg.dist, cfg.p)?,
        gap_psi_component: sup_gap(&a, &b),
        gap_psi_time_change: sup_gap(&a, &c),
        gap_component_time_change: sup_gap(&b, &c),
        solution: a,
    })
}

/// Replicated trajectories for every `n` of the configuration.
#[derive(Debug, Clone)]
pub struct StudyRun {
    pub n: usize,
    pub trajectories: Vec<Trajectory>,
    pub stats: ReplicateStats,
}

#[derive(Debug, Clone)]
pub struct Study {
    pub runs: Vec<StudyRun>,
}

pub fn run_study(cfg: &ExperimentConfig) -> Result<Study> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let params = cfg.model_params(n)?;
        let shared = shared_graph(cfg, n)?;
        let source = match &shared {
            Some(g) => GraphSource::Shared(g),
            None => GraphSource::ErdosRenyi,
        };
        let trajectories = replicate_trajectories(
            source,
            &cfg.dist,
            &params,
            &cfg.obs_times,
            cfg.replicates,
            cfg.master_seed,
        )?;
        let stats = ReplicateStats::from_trajectories(&trajectories, cfg.p)?;
        runs.push(StudyRun {
            n,
            trajectories,
            stats,
        });
    }
    Ok(Study { runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub t: f64,
    pub s_mean: f64,
    pub s_std: f64,
    pub v_mean: f64,
    pub v_std: f64,
    pub hs: f64,
    pub hv: f64,
    pub err_s: f64,
    pub err_v: f64,
    pub discrepancy: f64,
}

/// Worst-case errors over the observation grid for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub n: usize,
    pub max_err_s: f64,
    pub max_err_v: f64,
    pub mean_err_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub summary: Vec<ConvergenceSummary>,
    pub lemma1: Vec<Lemma1Row>,
    pub beta: Vec<BetaRow>,
}

impl ConvergenceReport {
    pub fn rows_for(&self, n: usize) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }
}

pub fn lln_experiment(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let study = run_study(cfg)?;
    lln_from_study(cfg, &study)
}

pub fn lln_from_study(cfg: &ExperimentConfig, study: &Study) -> Result<ConvergenceReport> {
    let limit = solve_psi(&cfg.limit_params()?, &cfg.obs_times, cfg.tol)?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for run in &study.runs {
        let st = &run.stats;
        let start = rows.len();
        for (ti, &t) in st.times.iter().enumerate() {
            let (s_mean, v_mean) = (st.s[ti].mean, st.v[ti].mean);
            let (hs, hv) = (limit.hs[ti], limit.hv[ti]);
            rows.push(ConvergenceRow {
                n: run.n,
                t,
                s_mean,
                s_std: st.s[ti].std,
                v_mean,
                v_std: st.v[ti].std,
                hs,
                hv,
                err_s: (s_mean - hs).abs(),
                err_v: (v_mean - hv).abs(),
                discrepancy: st.discrepancy[ti].mean,
            });
        }
        let own = &rows[start..];
        summary.push(ConvergenceSummary {
            n: run.n,
            max_err_s: own.iter().map(|r| r.err_s).fold(0.0, f64::max),
            max_err_v: own.iter().map(|r| r.err_v).fold(0.0, f64::max),
            mean_err_s: own.iter().map(|r| r.err_s).sum::<f64>() / own.len() as f64,
        });
    }
    let lemma1 = if cfg.lemma_t <= *cfg.obs_times.last().unwrap() + GRID_EPS {
        lemma1_from_study(cfg, study, cfg.lemma_t)?
    } else {
        Vec::new()
    };
    Ok(ConvergenceReport {
        rows,
        summary,
        lemma1,
        beta: beta_trend(cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub n: usize,
    pub t: f64,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
}

/// Per-replicate supremum over the observation grid, summarized over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollarySup {
    pub n: usize,
    pub sup: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub rows: Vec<CorollaryRow>,
    pub sup: Vec<CorollarySup>,
}

pub fn corollary_check(cfg: &ExperimentConfig) -> Result<CorollaryReport> {
    corollary_from_study(cfg, &run_study(cfg)?)
}

pub fn corollary_from_study(cfg: &ExperimentConfig, study: &Study) -> Result<CorollaryReport> {
    let mut rows = Vec::new();
    let mut sup = Vec::new();
    for run in &study.runs {
        let st = &run.stats;
        for (ti, &t) in st.times.iter().enumerate() {
            rows.push(CorollaryRow {
                n: run.n,
                t,
                mean: st.discrepancy[ti].mean,
                std: st.discrepancy[ti].std,
                max: st.discrepancy[ti].max,
            });
        }
        let per_replicate: Vec<f64> = run
            .trajectories
            .iter()
            .map(|tr| {
                tr.snapshots
                    .iter()
                    .map(|s| s.cross_discrepancy(cfg.p, run.n))
                    .fold(0.0, f64::max)
            })
            .collect();
        sup.push(CorollarySup {
            n: run.n,
            sup: Summary::from_samples(&per_replicate),
        });
    }
    Ok(CorollaryReport { rows, sup })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Susceptible,
    Infective,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Susceptible => "S",
            BoundKind::Infective => "I",
        }
    }
}

/// Fraction of replicates in which the per-class lower bound held at every
/// observation time up to `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Row {
    pub n: usize,
    pub t: f64,
    /// 1-based class index.
    pub class: usize,
    pub weight: f64,
    pub bound: BoundKind,
    pub threshold: f64,
    pub satisfied: usize,
    pub replicates: usize,
    pub fraction: f64,
}

pub fn lemma1_check(cfg: &ExperimentConfig, t: f64) -> Result<Vec<Lemma1Row>> {
    let mut cfg = cfg.clone();
    cfg.lemma_t = t;
    cfg.validate()?;
    check_within_grid(&cfg, t)?;
    lemma1_from_study(&cfg, &run_study(&cfg)?, t)
}

fn check_within_grid(cfg: &ExperimentConfig, t: f64) -> Result<()> {
    let last = *cfg.obs_times.last().unwrap();
    if t > last + GRID_EPS || t < cfg.obs_times[0] - GRID_EPS {
        return Err(Error::Precondition(format!(
            "t = {t} lies outside the observation range [{}, {last}]",
            cfg.obs_times[0]
        )));
    }
    Ok(())
}

pub fn lemma1_from_study(cfg: &ExperimentConfig, study: &Study, t: f64) -> Result<Vec<Lemma1Row>> {
    check_within_grid(cfg, t)?;
    let m1 = cfg.dist.max_weight();
    let s_factor = (1.0 - cfg.theta) * (-2.0 * cfg.lambda * m1 * m1 * t).exp();
    let i_factor = cfg.theta * (-2.0 * t).exp();
    let mut rows = Vec::new();
    for run in &study.runs {
        let nf = run.n as f64;
        for (j, atom) in cfg.dist.atoms().iter().enumerate() {
            for (bound, factor) in [(BoundKind::Susceptible, s_factor), (BoundKind::Infective, i_factor)] {
                let threshold = factor * atom.mu;
                let satisfied = run
                    .trajectories
                    .iter()
                    .filter(|tr| {
                        tr.snapshots.iter().filter(|s| s.t <= t + GRID_EPS).all(|s| {
                            let count = match bound {
                                BoundKind::Susceptible => s.s_by_class[j],
                                BoundKind::Infective => s.i_by_class[j],
                            };
                            count as f64 / nf >= threshold
                        })
                    })
                    .count();
                let replicates = run.trajectories.len();
                rows.push(Lemma1Row {
                    n: run.n,
                    t,
                    class: j + 1,
                    weight: atom.q,
                    bound,
                    threshold,
                    satisfied,
                    replicates,
                    fraction: satisfied as f64 / replicates as f64,
                });
            }
        }
    }
    Ok(rows)
}

/// Ordered means of `S_t / n` and `V_t / n` under the lower discretization,
/// the exact weights and the upper discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub n: usize,
    pub m: u32,
    pub t: f64,
    pub s_lower: Summary,
    pub s_exact: Summary,
    pub s_upper: Summary,
    pub v_lower: Summary,
    pub v_exact: Summary,
    pub v_upper: Summary,
    /// `mean S(lower) >= mean S(exact) >= mean S(upper)` up to two combined
    /// standard errors at each link.
    pub s_ordered: bool,
    /// `mean V(lower) <= mean V(exact) <= mean V(upper)`, same slack.
    pub v_ordered: bool,
    /// `mean S(lower) - mean S(upper)`
    pub gap_s: f64,
}

fn within(hi: &Summary, lo: &Summary) -> bool {
    let slack = 2.0 * (hi.std_error().powi(2) + lo.std_error().powi(2)).sqrt();
    hi.mean >= lo.mean - slack
}

/// Weights for the sandwich study: `Uniform(a, b)` if configured, otherwise
/// draws from the configured distribution.
pub fn sandwich_weights(cfg: &ExperimentConfig, n: usize, seed: u64) -> Vec<f64> {
    match cfg.rho_uniform {
        Some((a, b)) => {
            let dist = Uniform::new(a, b).expect("validated range");
            let mut rng = rng_from_seed(seed);
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
        None => sample_assignment(&cfg.dist, n, seed).values().to_vec(),
    }
}

pub fn sandwich_experiment(cfg: &ExperimentConfig, m_list: &[u32]) -> Result<Vec<SandwichRow>> {
    cfg.validate()?;
    if m_list.is_empty() || m_list.contains(&0) {
        return Err(Error::Precondition("m_list must be nonempty with entries >= 1".into()));
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let params = cfg.model_params(n)?;
        let shared = shared_graph(cfg, n)?;
        // [replicate][variant][time], variant 0 exact, then (lower, upper) per m.
        let runs: Vec<Vec<Vec<Snapshot>>> = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let key = |tag| derive_seed(cfg.master_seed, &[TAG_SANDWICH, tag, n as u64, r]);
                let mut owned = None;
                let g = graph_for_replicate(cfg, &shared, &mut owned, n, key(TAG_GRAPH))?;
                let rho = sandwich_weights(cfg, n, key(TAG_WEIGHTS));
                let init = init_states(n, cfg.theta, key(TAG_INIT));
                let run = |values: Vec<f64>| -> Result<Vec<Snapshot>> {
                    let w = WeightAssignment::from_values(values)?;
                    let traj = simulate_with(
                        g,
                        &w,
                        &params,
                        &init,
                        &cfg.obs_times,
                        key(TAG_DYNAMICS),
                        Recording::Aggregate,
                    )?;
                    Ok(traj.snapshots)
                };
                let mut out = vec![run(rho.clone())?];
                for &m in m_list {
                    out.push(run(discretize(&rho, m, Rounding::Lower)?)?);
                    out.push(run(discretize(&rho, m, Rounding::Upper)?)?);
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;

        let nf = n as f64;
        let summarize = |variant: usize, ti: usize, field: fn(&Snapshot) -> f64| {
            let xs: Vec<f64> = runs.iter().map(|rep| field(&rep[variant][ti]) / nf).collect();
            Summary::from_samples(&xs)
        };
        let s_of: fn(&Snapshot) -> f64 = |s| s.susceptible as f64;
        let v_of: fn(&Snapshot) -> f64 = |s| s.v;
        for (mi, &m) in m_list.iter().enumerate() {
            for (ti, &t) in cfg.obs_times.iter().enumerate() {
                let (lo, hi) = (1 + 2 * mi, 2 + 2 * mi);
                let s_lower = summarize(lo, ti, s_of);
                let s_exact = summarize(0, ti, s_of);
                let s_upper = summarize(hi, ti, s_of);
                let v_lower = summarize(lo, ti, v_of);
                let v_exact = summarize(0, ti, v_of);
                let v_upper = summarize(hi, ti, v_of);
                rows.push(SandwichRow {
                    n,
                    m,
                    t,
                    s_ordered: within(&s_lower, &s_exact) && within(&s_exact, &s_upper),
                    v_ordered: within(&v_exact, &v_lower) && within(&v_upper, &v_exact),
                    gap_s: s_lower.mean - s_upper.mean,
                    s_lower,
                    s_exact,
                    s_upper,
                    v_lower,
                    v_exact,
                    v_upper,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub lambda: f64,
    pub ratio: f64,
    pub final_s: Summary,
    pub critical: bool,
}

/// Default sweep: multiples of the critical rate.
pub const DEFAULT_THRESHOLD_RATIOS: [f64; 9] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0];

/// Final susceptible fraction after extinction, for each rate in the grid
/// (with the critical rate always included). Replicate `r` uses the same
/// graph, weights and initial states at every rate.
pub fn threshold_sweep(cfg: &ExperimentConfig, lambda_grid: &[f64]) -> Result<Vec<ThresholdRow>> {
    cfg.validate()?;
    let lambda_c = lambda_critical(&cfg.dist, cfg.p)?;
    let mut grid: Vec<f64> = if lambda_grid.is_empty() {
        DEFAULT_THRESHOLD_RATIOS.iter().map(|r| r * lambda_c).collect()
    } else {
        lambda_grid.to_vec()
    };
    if let Some(bad) = grid.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Domain(format!("lambda grid entry {bad} must be positive")));
    }
    let is_critical = |l: f64| (l - lambda_c).abs() <= 1e-12 * lambda_c;
    if !grid.iter().any(|&l| is_critical(l)) {
        grid.push(lambda_c);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let shared = shared_graph(cfg, n)?;
        let finals: Vec<Vec<f64>> = (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|r| {
                let key = |tag| derive_seed(cfg.master_seed, &[TAG_THRESHOLD, tag, n as u64, r]);
                let mut owned = None;
                let g = graph_for_replicate(cfg, &shared, &mut owned, n, key(TAG_GRAPH))?;
                let w = sample_assignment(&cfg.dist, n, key(TAG_WEIGHTS));
                let init = init_states(n, cfg.theta, key(TAG_INIT));
                grid.iter()
                    .map(|&lambda| {
                        let params = ModelParams::new(n, cfg.p, lambda, cfg.theta)?;
                        let mut engine = Engine::new(g, &w, &params, &init, key(TAG_DYNAMICS))?;
                        engine.run_to_extinction();
                        Ok(engine.susceptible_count() as f64 / n as f64)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (li, &lambda) in grid.iter().enumerate() {
            let xs: Vec<f64> = finals.iter().map(|f| f[li]).collect();
            rows.push(ThresholdRow {
                n,
                lambda,
                ratio: lambda / lambda_c,
                final_s: Summary::from_samples(&xs),
                critical: is_critical(lambda),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub n: usize,
    pub p: f64,
    pub c: f64,
    pub d: f64,
    pub trials: usize,
    pub beta: f64,
    pub beta_over_n2: f64,
}

/// Sampled `beta(c, d, n)` on one `G(n, p)` per `n`.
pub fn beta_trend(cfg: &ExperimentConfig) -> Result<Vec<BetaRow>> {
    cfg.n_list
        .iter()
        .map(|&n| {
            let owned;
            let g = match shared_graph(cfg, n)? {
                Some(g) => {
                    owned = g;
                    &owned
                }
                None => {
                    owned = generate_er(n, cfg.p, derive_seed(cfg.master_seed, &[TAG_BETA, TAG_GRAPH, n as u64]))?;
                    &owned
                }
            };
            let seed = derive_seed(cfg.master_seed, &[TAG_BETA, n as u64]);
            let beta = estimate_beta(g, cfg.p, cfg.beta_c, cfg.beta_d, cfg.beta_trials, seed)?;
            let nf = n as f64;
            Ok(BetaRow {
                n,
                p: cfg.p,
                c: cfg.beta_c,
                d: cfg.beta_d,
                trials: cfg.beta_trials,
                beta,
                beta_over_n2: beta / (nf * nf),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig::parse(
            "dist = 1:0.5, 2:0.5\ntheta = 0.2\np = 0.2\nlambda = 3\n\
             n_list = 100, 300\nreplicates = 6\nobs_times = 0:0.25:1\nmaster_seed = 11\n",
        )
        .unwrap()
    }

    #[test]
    fn t0_errors_are_binomial_only() {
        let cfg = small_cfg();
        let report = lln_experiment(&cfg).unwrap();
        for row in report.rows.iter().filter(|r| r.t == 0.0) {
            assert_eq!(row.hs, 1.0 - cfg.theta);
            let sd = (cfg.theta * (1.0 - cfg.theta) / row.n as f64).sqrt();
            assert!(row.err_s < 4.0 * sd, "{row:?}");
        }
        for row in &report.rows {
            assert_eq!(row.err_s, (row.s_mean - row.hs).abs());
            assert_eq!(row.err_v, (row.v_mean - row.hv).abs());
        }
        assert_eq!(report.rows.len(), 2 * 5);
        assert_eq!(report.beta.len(), 2);
        assert!(report.lemma1.iter().all(|r| (0.0..=1.0).contains(&r.fraction)));
    }

    #[test]
    fn experiments_are_deterministic() {
        let cfg = small_cfg();
        assert_eq!(lln_experiment(&cfg).unwrap(), lln_experiment(&cfg).unwrap());
        assert_eq!(
            sandwich_experiment(&cfg, &[2]).unwrap(),
            sandwich_experiment(&cfg, &[2]).unwrap()
        );
    }

    #[test]
    fn complete_graph_has_zero_discrepancy() {
        let mut cfg = small_cfg();
        cfg.all_edges = true;
        cfg.p = 1.0;
        cfg.lambda = 0.5;
        let report = corollary_check(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.max == 0.0));
        assert!(report.sup.iter().all(|s| s.sup.max == 0.0));
    }

    #[test]
    fn dying_epidemic_has_small_discrepancy() {
        let mut cfg = small_cfg();
        cfg.theta = 1e-4;
        cfg.lambda = 1e-3;
        let report = corollary_check(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.max < 1e-3), "{:?}", report.rows);
    }

    #[test]
    fn lemma1_rejects_t_outside_grid() {
        assert!(lemma1_check(&small_cfg(), 5.0).is_err());
    }

    #[test]
    fn lemma1_at_origin_matches_initial_counts() {
        let cfg = small_cfg();
        let study = run_study(&cfg).unwrap();
        let rows = lemma1_from_study(&cfg, &study, 0.0).unwrap();
        let run = &study.runs[0];
        let expected = run
            .trajectories
            .iter()
            .filter(|tr| tr.snapshots[0].i_by_class[0] as f64 / 100.0 >= cfg.theta * 0.5)
            .count();
        let row = rows
            .iter()
            .find(|r| r.n == 100 && r.class == 1 && r.bound == BoundKind::Infective)
            .unwrap();
        assert_eq!(row.satisfied, expected);
        assert_eq!(row.threshold, cfg.theta * 0.5);
    }

    #[test]
    fn threshold_marks_critical_rate() {
        let mut cfg = small_cfg();
        cfg.n_list = vec![200];
        let rows = threshold_sweep(&cfg, &[0.1, 1.0]).unwrap();
        let lambda_c = lambda_critical(&cfg.dist, cfg.p).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows.iter().filter(|r| r.critical).count(), 1);
        assert_eq!(rows.iter().find(|r| r.critical).unwrap().lambda, lambda_c);
        assert!(rows.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }

    #[test]
    fn tiny_rate_leaves_susceptibles_alone() {
        let mut cfg = small_cfg();
        cfg.theta = 0.01;
        cfg.n_list = vec![300];
        let rows = threshold_sweep(&cfg, &[1e-4]).unwrap();
        let row = rows.iter().find(|r| r.lambda == 1e-4).unwrap();
        assert!((row.final_s.mean - 0.99).abs() < 0.02, "{row:?}");
    }

    #[test]
    fn sandwich_orders_hold_on_small_instance() {
        let mut cfg = small_cfg();
        cfg.rho_uniform = Some((0.0, 2.0));
        cfg.n_list = vec![300];
        let rows = sandwich_experiment(&cfg, &[1, 8]).unwrap();
        assert_eq!(rows.len(), 2 * cfg.obs_times.len());
        for r in rows.iter().filter(|r| r.t == 0.0) {
            assert_eq!(r.s_lower.mean, r.s_exact.mean);
            assert_eq!(r.gap_s, 0.0);
        }
    }

    #[test]
    fn grid_weights_are_fixed_by_lower_rounding() {
        let mut cfg = small_cfg();
        cfg.rho_uniform = None;
        let rho = sandwich_weights(&cfg, 50, 3);
        assert_eq!(discretize(&rho, 4, Rounding::Lower).unwrap(), rho);
        let up = discretize(&rho, 4, Rounding::Upper).unwrap();
        assert!(rho.iter().zip(&up).all(|(a, b)| (b - a - 0.25).abs() < 1e-15));
    }

    #[test]
    fn limit_routes_agree() {
        let curves = limit_curves(&small_cfg()).unwrap();
        assert!(curves.gap_psi_component < 1e-6);
        assert!(curves.gap_psi_time_change < 1e-6);
        assert_eq!(curves.solution.times.first(), Some(&0.0));
    }
}
