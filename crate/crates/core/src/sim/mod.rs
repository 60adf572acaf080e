//! Exact continuous-time simulation of the weighted SIR chain.
//!
//! A susceptible vertex `v` is infected at rate
//! `(lambda/n) rho(v) sum_{u ~ v, u infective} rho(u)`; an infective vertex is
//! removed at rate one and stays removed.

mod engine;
mod replicates;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use engine::{Engine, Event, EventKind, REFRESH_INTERVAL};
pub use replicates::{
    replicate_trajectories, run_replicates, GraphSource, ReplicateStats, Summary,
};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::rng_from_seed;
use crate::weights::WeightAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    /// Edge probability. Only used in reported formulas; `1` marks the
    /// complete-graph fixture.
    pub p: f64,
    pub lambda: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, lambda: f64, theta: f64) -> Result<Self> {
        let params = Self { n, p, lambda, theta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {} must be positive", self.lambda)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Domain("theta must lie strictly in (0,1)".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Domain(format!("p = {} must lie in (0,1]", self.p)));
        }
        Ok(())
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(i8)]
pub enum VertexState {
    Susceptible = 0,
    Infective = 1,
    Removed = -1,
}

impl VertexState {
    pub fn code(self) -> i8 {
        self as i8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVector(Vec<VertexState>);

impl StateVector {
    pub fn new(states: Vec<VertexState>) -> Self {
        Self(states)
    }

    pub fn all(n: usize, state: VertexState) -> Self {
        Self(vec![state; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[VertexState] {
        &self.0
    }

    pub fn count(&self, state: VertexState) -> usize {
        self.0.iter().filter(|&&s| s == state).count()
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = VertexState;

    fn index(&self, i: usize) -> &VertexState {
        &self.0[i]
    }
}

/// Each vertex independently infective with probability `theta`.
pub fn init_states(n: usize, theta: f64, seed: u64) -> StateVector {
    let mut rng = rng_from_seed(seed);
    StateVector(
        (0..n)
            .map(|_| {
                if rng.random_bool(theta) {
                    VertexState::Infective
                } else {
                    VertexState::Susceptible
                }
            })
            .collect(),
    )
}

/// Infection rate of the susceptible vertex `v`, straight from the definition.
pub fn infection_rate_of(
    v: usize,
    states: &StateVector,
    g: &Graph,
    w: &WeightAssignment,
    params: &ModelParams,
) -> Result<f64> {
    if v >= states.len() {
        return Err(Error::Precondition(format!("vertex {v} out of range")));
    }
    if states[v] != VertexState::Susceptible {
        return Err(Error::Precondition(format!("vertex {v} is not susceptible")));
    }
    let rho = w.values();
    let pressure: f64 = g
        .neighbors(v)
        .filter(|&u| states[u] == VertexState::Infective)
        .map(|u| rho[u])
        .sum();
    Ok(params.lambda / params.n as f64 * rho[v] * pressure)
}

/// What to record at each observation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recording {
    /// Totals plus per-class counts and the class-pair cross-edge matrix.
    Full,
    /// Totals only; use when the weight classes are too many (continuous weights).
    Aggregate,
}

/// State summary at one observation time. `cross[j * K + l]` counts edges
/// between a susceptible class-`j` vertex and an infective class-`l` vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub susceptible: u64,
    pub infective: u64,
    pub removed: u64,
    pub v: f64,
    pub s_by_class: Vec<u64>,
    pub i_by_class: Vec<u64>,
    pub cross: Vec<u64>,
}

impl Snapshot {
    /// `max_{j,l} |L(j,l) - p S(j) I(l)| / n^2`.
    pub fn cross_discrepancy(&self, p: f64, n: usize) -> f64 {
        let k = self.s_by_class.len();
        let n2 = (n as f64) * (n as f64);
        let mut worst = 0.0f64;
        for j in 0..k {
            for l in 0..k {
                let expected = p * self.s_by_class[j] as f64 * self.i_by_class[l] as f64;
                worst = worst.max((self.cross[j * k + l] as f64 - expected).abs());
            }
        }
        worst / n2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    pub class_values: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub event_count: u64,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }

    /// CSV with columns `t,S,V,S_1..S_K,I_1..I_K,L_11..L_KK`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let k = self
            .snapshots
            .first()
            .map(|s| s.s_by_class.len())
            .unwrap_or(0);
        let mut header = vec!["t".to_string(), "S".into(), "V".into()];
        header.extend((1..=k).map(|j| format!("S_{j}")));
        header.extend((1..=k).map(|j| format!("I_{j}")));
        for j in 1..=k {
            for l in 1..=k {
                header.push(if k < 10 {
                    format!("L_{j}{l}")
                } else {
                    format!("L_{j}_{l}")
                });
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for s in &self.snapshots {
            let mut row = vec![s.t.to_string(), s.susceptible.to_string(), s.v.to_string()];
            row.extend(s.s_by_class.iter().map(u64::to_string));
            row.extend(s.i_by_class.iter().map(u64::to_string));
            row.extend(s.cross.iter().map(u64::to_string));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_obs_times(obs_times: &[f64]) -> Result<()> {
    if obs_times.is_empty() {
        return Err(Error::Precondition("observation times must be nonempty".into()));
    }
    if !(obs_times[0] >= 0.0) || obs_times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Precondition("observation times must be finite and start at t >= 0".into()));
    }
    if obs_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("observation times must be strictly increasing".into()));
    }
    Ok(())
}

/// One realization observed at `obs_times`, with full per-class recording.
pub fn simulate(
    g: &Graph,
    w: &WeightAssignment,
    params: &ModelParams,
    init: &StateVector,
    obs_times: &[f64],
    seed: u64,
) -> Result<Trajectory> {
    simulate_with(g, w, params, init, obs_times, seed, Recording::Full)
}

pub fn simulate_with(
    g: &Graph,
    w: &WeightAssignment,
    params: &ModelParams,
    init: &StateVector,
    obs_times: &[f64],
    seed: u64,
    recording: Recording,
) -> Result<Trajectory> {
    check_obs_times(obs_times)?;
    let mut engine = Engine::new(g, w, params, init, seed)?;
    let snapshots = engine.observe(obs_times, recording);
    Ok(Trajectory {
        n: g.n(),
        class_values: w.class_values().to_vec(),
        snapshots,
        event_count: engine.event_count(),
    })
}

/// Observables of a state computed from scratch by scanning every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub s: u64,
    pub v: f64,
    pub s_by_class: Vec<u64>,
    pub i_by_class: Vec<u64>,
    pub cross: Vec<u64>,
}

pub fn observables(states: &StateVector, w: &WeightAssignment, g: &Graph) -> Result<Observables> {
    if states.len() != w.len() || states.len() != g.n() {
        return Err(Error::Dimension(format!(
            "states {}, weights {}, graph {}",
            states.len(),
            w.len(),
            g.n()
        )));
    }
    let k = w.num_classes();
    let class_of = w.class_of();
    let mut s_by_class = vec![0u64; k];
    let mut i_by_class = vec![0u64; k];
    for (v, &st) in states.as_slice().iter().enumerate() {
        match st {
            VertexState::Susceptible => s_by_class[class_of[v] as usize] += 1,
            VertexState::Infective => i_by_class[class_of[v] as usize] += 1,
            VertexState::Removed => {}
        }
    }
    let mut cross = vec![0u64; k * k];
    for (a, b) in g.edges() {
        let (sa, sb) = (states[a], states[b]);
        let pair = match (sa, sb) {
            (VertexState::Susceptible, VertexState::Infective) => Some((a, b)),
            (VertexState::Infective, VertexState::Susceptible) => Some((b, a)),
            _ => None,
        };
        if let Some((sus, inf)) = pair {
            cross[class_of[sus] as usize * k + class_of[inf] as usize] += 1;
        }
    }
    let v = w
        .class_values()
        .iter()
        .zip(&i_by_class)
        .map(|(q, &i)| q * i as f64)
        .sum();
    Ok(Observables {
        s: s_by_class.iter().sum(),
        v,
        s_by_class,
        i_by_class,
        cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;
    use crate::weights::{sample_assignment, WeightDistribution};
    use approx::assert_abs_diff_eq;
    use VertexState::*;

    fn path4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(10, 0.5, 1.0, 0.0).is_err());
        assert!(ModelParams::new(10, 0.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(10, 0.5, 0.0, 0.5).is_err());
        assert!(ModelParams::new(10, 1.0, 1.0, 0.5).is_ok());
        assert!(ModelParams::new(10, 1.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn initial_states() {
        let n = 10_000;
        let s = init_states(n, 0.5, 3);
        assert_eq!(s, init_states(n, 0.5, 3));
        assert_eq!(s.count(Removed), 0);
        let inf = s.count(Infective) as f64;
        assert!((inf - 5000.0).abs() < 4.0 * (n as f64 * 0.25).sqrt());
    }

    #[test]
    fn infection_rate_examples() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let w = WeightAssignment::uniform(2, 1.0);
        let p = ModelParams::new(2, 0.5, 2.0, 0.5).unwrap();
        let st = StateVector::new(vec![Infective, Susceptible]);
        assert_abs_diff_eq!(infection_rate_of(1, &st, &g, &w, &p).unwrap(), 1.0);
        assert!(matches!(
            infection_rate_of(0, &st, &g, &w, &p),
            Err(Error::Precondition(_))
        ));
        let st = StateVector::new(vec![Removed, Susceptible]);
        assert_eq!(infection_rate_of(1, &st, &g, &w, &p).unwrap(), 0.0);

        // v = 0 with infective neighbors of weight 1 and 2.
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let w = WeightAssignment::from_values(vec![2.0, 1.0, 2.0, 5.0]).unwrap();
        let st = StateVector::new(vec![Susceptible, Infective, Infective, Removed]);
        let p = ModelParams::new(4, 0.5, 3.0, 0.5).unwrap();
        assert_abs_diff_eq!(infection_rate_of(0, &st, &g, &w, &p).unwrap(), 4.5);
    }

    #[test]
    fn observables_examples() {
        let g = path4();
        let w = WeightAssignment::uniform(4, 1.0);
        let obs = observables(&StateVector::all(4, Removed), &w, &g).unwrap();
        assert_eq!((obs.s, obs.v), (0, 0.0));
        assert!(obs.cross.iter().all(|&x| x == 0));

        let obs = observables(&StateVector::all(4, Infective), &w, &g).unwrap();
        assert_eq!(obs.v, 4.0);

        let st = StateVector::new(vec![Infective, Susceptible, Susceptible, Infective]);
        let obs = observables(&st, &w, &g).unwrap();
        assert_eq!(obs.cross, vec![2]);
        assert_eq!(obs.s, 2);
    }

    #[test]
    fn all_susceptible_is_absorbing() {
        let g = generate_er(50, 0.2, 1).unwrap();
        let w = WeightAssignment::uniform(50, 1.0);
        let p = ModelParams::new(50, 0.2, 3.0, 0.5).unwrap();
        let init = StateVector::all(50, Susceptible);
        let traj = simulate(&g, &w, &p, &init, &[0.0, 1.0, 5.0], 1).unwrap();
        assert_eq!(traj.event_count, 0);
        for s in &traj.snapshots {
            assert_eq!(s.susceptible, 50);
            assert_eq!(s.v, 0.0);
        }
    }

    #[test]
    fn dimension_and_time_errors() {
        let g = generate_er(5, 0.5, 1).unwrap();
        let w = WeightAssignment::uniform(4, 1.0);
        let p = ModelParams::new(5, 0.5, 1.0, 0.5).unwrap();
        let init = StateVector::all(5, Infective);
        assert!(matches!(
            simulate(&g, &w, &p, &init, &[0.0], 1),
            Err(Error::Dimension(_))
        ));
        let w = WeightAssignment::uniform(5, 1.0);
        assert!(simulate(&g, &w, &p, &init, &[], 1).is_err());
        assert!(simulate(&g, &w, &p, &init, &[1.0, 0.5], 1).is_err());
        assert!(simulate(&g, &w, &p, &init, &[-1.0], 1).is_err());
    }

    #[test]
    fn engine_snapshot_matches_scratch_observables() {
        let dist = WeightDistribution::new(&[(0.5, 0.3), (1.0, 0.3), (2.0, 0.4)]).unwrap();
        let n = 300;
        let g = generate_er(n, 0.1, 4).unwrap();
        let w = sample_assignment(&dist, n, 5);
        let p = ModelParams::new(n, 0.1, 4.0, 0.1).unwrap();
        let init = init_states(n, 0.1, 6);
        let mut engine = Engine::new(&g, &w, &p, &init, 7).unwrap();
        for round in 0..40 {
            for _ in 0..10 {
                engine.step();
            }
            let states = StateVector::new(engine.states().to_vec());
            let scratch = observables(&states, &w, &g).unwrap();
            let snap = engine.snapshot(engine.time(), Recording::Full);
            assert_eq!(snap.s_by_class, scratch.s_by_class, "round {round}");
            assert_eq!(snap.i_by_class, scratch.i_by_class);
            assert_eq!(snap.cross, scratch.cross);
            assert_abs_diff_eq!(snap.v, scratch.v, epsilon = 1e-12);
            let agg = engine.snapshot(engine.time(), Recording::Aggregate);
            assert_abs_diff_eq!(agg.v, scratch.v, epsilon = 1e-9);
            for v in 0..n {
                if states[v] == Susceptible {
                    let direct = infection_rate_of(v, &states, &g, &w, &p).unwrap();
                    assert_abs_diff_eq!(engine.vertex_rate(v), direct, epsilon = 1e-12);
                } else {
                    assert_eq!(engine.vertex_rate(v), 0.0);
                }
            }
        }
    }

    #[test]
    fn event_log_audit() {
        let dist = WeightDistribution::new(&[(0.0, 0.2), (1.0, 0.4), (3.0, 0.4)]).unwrap();
        let n = 200;
        let g = generate_er(n, 0.2, 8).unwrap();
        let w = sample_assignment(&dist, n, 9);
        let p = ModelParams::new(n, 0.2, 5.0, 0.05).unwrap();
        let init = init_states(n, 0.05, 10);
        let mut engine = Engine::new(&g, &w, &p, &init, 11).unwrap();
        let mut last = engine.snapshot(0.0, Recording::Full);
        let mut states = init.as_slice().to_vec();
        let mut t = 0.0;
        while let Some(ev) = engine.step() {
            assert!(ev.time > t);
            t = ev.time;
            let rho = w.values()[ev.vertex];
            let before = states[ev.vertex];
            let snap = engine.snapshot(t, Recording::Full);
            match ev.kind {
                EventKind::Infection => {
                    assert_eq!(before, Susceptible);
                    assert!(rho > 0.0, "zero-weight vertex infected");
                    states[ev.vertex] = Infective;
                    assert_abs_diff_eq!(snap.v - last.v, rho, epsilon = 1e-9);
                    assert_eq!(snap.susceptible + 1, last.susceptible);
                }
                EventKind::Recovery => {
                    assert_eq!(before, Infective);
                    states[ev.vertex] = Removed;
                    assert_abs_diff_eq!(snap.v - last.v, -rho, epsilon = 1e-9);
                    assert_eq!(snap.removed, last.removed + 1);
                }
            }
            assert_eq!(snap.susceptible + snap.infective + snap.removed, n as u64);
            assert_eq!(engine.states(), states.as_slice());
            last = snap;
        }
        assert_eq!(engine.infective_count(), 0);
    }

    #[test]
    fn trajectory_invariants() {
        let dist = WeightDistribution::new(&[(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let n = 500;
        let g = generate_er(n, 0.1, 1).unwrap();
        let w = sample_assignment(&dist, n, 2);
        let p = ModelParams::new(n, 0.1, 6.0, 0.1).unwrap();
        let init = init_states(n, 0.1, 3);
        let obs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let traj = simulate(&g, &w, &p, &init, &obs, 4).unwrap();
        assert_eq!(traj, simulate(&g, &w, &p, &init, &obs, 4).unwrap());
        let k = w.num_classes();
        for pair in traj.snapshots.windows(2) {
            assert!(pair[1].susceptible <= pair[0].susceptible);
            assert!(pair[1].removed >= pair[0].removed);
        }
        for s in &traj.snapshots {
            assert_eq!(s.susceptible, s.s_by_class.iter().sum::<u64>());
            let v: f64 = (0..k).map(|l| w.class_values()[l] * s.i_by_class[l] as f64).sum();
            assert_abs_diff_eq!(s.v, v, epsilon = 1e-9);
            assert!(s.v >= 0.0 && s.v <= n as f64 * 2.0);
            assert_eq!(s.susceptible + s.infective + s.removed, n as u64);
        }
    }

    #[test]
    fn refresh_keeps_rates() {
        let n = 100;
        let g = generate_er(n, 0.3, 2).unwrap();
        let w = WeightAssignment::from_values((0..n).map(|i| 0.1 + (i % 7) as f64 * 0.3).collect()).unwrap();
        let p = ModelParams::new(n, 0.3, 2.0, 0.2).unwrap();
        let init = init_states(n, 0.2, 3);
        let mut engine = Engine::new(&g, &w, &p, &init, 4).unwrap();
        for _ in 0..30 {
            engine.step();
        }
        let before: Vec<f64> = (0..n).map(|v| engine.vertex_rate(v)).collect();
        engine.refresh();
        for v in 0..n {
            assert_abs_diff_eq!(engine.vertex_rate(v), before[v], epsilon = 1e-12);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let g = path4();
        let w = WeightAssignment::from_values(vec![1.0, 2.0, 1.0, 2.0]).unwrap();
        let p = ModelParams::new(4, 0.5, 1.0, 0.5).unwrap();
        let init = StateVector::new(vec![Infective, Susceptible, Susceptible, Infective]);
        let traj = simulate(&g, &w, &p, &init, &[0.0], 1).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,S,V,S_1,S_2,I_1,I_2,L_11,L_12,L_21,L_22");
        // Susceptible 1 (q=2) touches infective 0 (q=1); susceptible 2 (q=1) touches 3 (q=2).
        assert_eq!(lines.next().unwrap(), "0,2,3,1,1,1,1,0,1,1,0");
    }
}
