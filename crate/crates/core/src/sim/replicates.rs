use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{init_states, simulate, ModelParams, Trajectory};
use crate::error::{Error, Result};
use crate::graph::{generate_er, Graph};
use crate::seed::{derive_seed, TAG_DYNAMICS, TAG_GRAPH, TAG_INIT, TAG_WEIGHTS};
use crate::weights::{sample_assignment, WeightDistribution};

/// Where each replicate's graph comes from.
#[derive(Debug, Clone, Copy)]
pub enum GraphSource<'a> {
    /// Fresh `G(n, p)` per replicate.
    ErdosRenyi,
    /// One graph shared by every replicate (quenched runs, complete-graph fixture).
    Shared(&'a Graph),
}

/// Independent replicates with per-replicate seeds
/// `derive_seed(master, [purpose, n, replicate])`. Results are in replicate
/// order regardless of scheduling.
pub fn replicate_trajectories(
    source: GraphSource<'_>,
    dist: &WeightDistribution,
    params: &ModelParams,
    obs_times: &[f64],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<Trajectory>> {
    params.validate()?;
    if replicates == 0 {
        return Err(Error::Precondition("replicate count must be at least 1".into()));
    }
    let n = params.n;
    if let GraphSource::Shared(g) = source {
        if g.n() != n {
            return Err(Error::Dimension(format!(
                "shared graph has {} vertices, parameters say {n}",
                g.n()
            )));
        }
    }
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let key = |tag| derive_seed(master_seed, &[tag, n as u64, r]);
            let owned;
            let g = match source {
                GraphSource::Shared(g) => g,
                GraphSource::ErdosRenyi => {
                    owned = generate_er(n, params.p, key(TAG_GRAPH))?;
                    &owned
                }
            };
            let w = sample_assignment(dist, n, key(TAG_WEIGHTS));
            let init = init_states(n, params.theta, key(TAG_INIT));
            simulate(g, &w, params, &init, obs_times, key(TAG_DYNAMICS))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single sample.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Summary {
    pub fn from_samples(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                count,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            mean,
            std,
            min,
            max,
            count,
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.std / (self.count as f64).sqrt()
        }
    }
}

/// Per-observation-time summaries across replicates, all normalized by `n`
/// (the cross-edge discrepancy by `n^2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateStats {
    pub n: usize,
    pub replicates: usize,
    pub times: Vec<f64>,
    pub s: Vec<Summary>,
    pub v: Vec<Summary>,
    /// `[time][class]`
    pub s_by_class: Vec<Vec<Summary>>,
    pub i_by_class: Vec<Vec<Summary>>,
    pub discrepancy: Vec<Summary>,
}

impl ReplicateStats {
    pub fn from_trajectories(trajs: &[Trajectory], p: f64) -> Result<Self> {
        let first = trajs
            .first()
            .ok_or_else(|| Error::Precondition("no trajectories".into()))?;
        let n = first.n;
        let nf = n as f64;
        let times: Vec<f64> = first.times().collect();
        let k = first.snapshots.first().map(|s| s.s_by_class.len()).unwrap_or(0);
        for tr in trajs {
            if tr.n != n || tr.snapshots.len() != times.len() {
                return Err(Error::Dimension("trajectories differ in shape".into()));
            }
        }
        let column = |f: &dyn Fn(&Trajectory, usize) -> f64, ti: usize| {
            let xs: Vec<f64> = trajs.iter().map(|tr| f(tr, ti)).collect();
            Summary::from_samples(&xs)
        };
        let mut stats = Self {
            n,
            replicates: trajs.len(),
            times: times.clone(),
            s: Vec::new(),
            v: Vec::new(),
            s_by_class: Vec::new(),
            i_by_class: Vec::new(),
            discrepancy: Vec::new(),
        };
        for ti in 0..times.len() {
            stats
                .s
                .push(column(&|tr, ti| tr.snapshots[ti].susceptible as f64 / nf, ti));
            stats.v.push(column(&|tr, ti| tr.snapshots[ti].v / nf, ti));
            stats.s_by_class.push(
                (0..k)
                    .map(|j| column(&|tr, ti| tr.snapshots[ti].s_by_class[j] as f64 / nf, ti))
                    .collect(),
            );
            stats.i_by_class.push(
                (0..k)
                    .map(|j| column(&|tr, ti| tr.snapshots[ti].i_by_class[j] as f64 / nf, ti))
                    .collect(),
            );
            stats.discrepancy.push(if k > 0 {
                column(&|tr, ti| tr.snapshots[ti].cross_discrepancy(p, n), ti)
            } else {
                Summary::from_samples(&[])
            });
        }
        Ok(stats)
    }
}

pub fn run_replicates(
    source: GraphSource<'_>,
    dist: &WeightDistribution,
    params: &ModelParams,
    obs_times: &[f64],
    replicates: usize,
    master_seed: u64,
) -> Result<ReplicateStats> {
    let trajs = replicate_trajectories(source, dist, params, obs_times, replicates, master_seed)?;
    ReplicateStats::from_trajectories(&trajs, params.p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basics() {
        let s = Summary::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!((s.mean, s.std, s.min, s.max, s.count), (2.0, 1.0, 1.0, 3.0, 3));
        let one = Summary::from_samples(&[0.25]);
        assert_eq!((one.mean, one.std), (0.25, 0.0));
    }

    #[test]
    fn single_replicate_equals_trajectory() {
        let dist = WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let params = ModelParams::new(200, 0.2, 3.0, 0.2).unwrap();
        let obs = [0.0, 0.5, 1.0];
        let trajs =
            replicate_trajectories(GraphSource::ErdosRenyi, &dist, &params, &obs, 1, 5).unwrap();
        let stats = run_replicates(GraphSource::ErdosRenyi, &dist, &params, &obs, 1, 5).unwrap();
        for (ti, snap) in trajs[0].snapshots.iter().enumerate() {
            assert_eq!(stats.s[ti].mean, snap.susceptible as f64 / 200.0);
            assert_eq!(stats.s[ti].std, 0.0);
            assert_eq!(stats.v[ti].mean, snap.v / 200.0);
            assert_eq!(stats.v[ti].min, stats.v[ti].max);
        }
    }

    #[test]
    fn replicates_are_deterministic_and_distinct() {
        let dist = WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let params = ModelParams::new(150, 0.2, 3.0, 0.2).unwrap();
        let obs = [0.0, 1.0];
        let a = run_replicates(GraphSource::ErdosRenyi, &dist, &params, &obs, 4, 9).unwrap();
        let b = run_replicates(GraphSource::ErdosRenyi, &dist, &params, &obs, 4, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.s[1].std > 0.0);
        assert!(run_replicates(GraphSource::ErdosRenyi, &dist, &params, &obs, 0, 9).is_err());
    }

    #[test]
    fn shared_graph_dimension_checked() {
        let dist = WeightDistribution::constant(1.0).unwrap();
        let params = ModelParams::new(10, 1.0, 1.0, 0.5).unwrap();
        let g = Graph::complete(9);
        assert!(matches!(
            run_replicates(GraphSource::Shared(&g), &dist, &params, &[0.0], 2, 1),
            Err(Error::Dimension(_))
        ));
    }
}
