use rand::Rng;
use rand_distr::Exp1;

use super::{ModelParams, Recording, Snapshot, StateVector, VertexState};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::{rng_from_seed, SimRng};
use crate::weights::WeightAssignment;

/// Events between full recomputations of the incrementally maintained rates.
pub const REFRESH_INTERVAL: u64 = 1 << 16;

/// Binary sum tree over per-vertex rates. Internal nodes are recomputed from
/// their children on every update, so node sums never drift away from the
/// leaves.
#[derive(Debug, Clone)]
struct SumTree {
    cap: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn new(len: usize) -> Self {
        let cap = len.max(1).next_power_of_two();
        Self {
            cap,
            nodes: vec![0.0; 2 * cap],
        }
    }

    #[inline]
    fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[inline]
    fn set(&mut self, i: usize, value: f64) {
        let mut k = self.cap + i;
        self.nodes[k] = value;
        k /= 2;
        while k >= 1 {
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
            k /= 2;
        }
    }

    fn rebuild(&mut self, leaves: impl Iterator<Item = f64>) {
        self.nodes.iter_mut().for_each(|x| *x = 0.0);
        for (i, v) in leaves.enumerate() {
            self.nodes[self.cap + i] = v;
        }
        for k in (1..self.cap).rev() {
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Leaf whose cumulative range contains `x`. Only descends into subtrees
    /// with positive mass, so a zero-rate leaf is never returned while the
    /// total is positive.
    #[inline]
    fn find(&self, mut x: f64) -> usize {
        let mut k = 1;
        while k < self.cap {
            let left = self.nodes[2 * k];
            if x < left || self.nodes[2 * k + 1] <= 0.0 {
                k *= 2;
            } else {
                x -= left;
                k = 2 * k + 1;
            }
        }
        k - self.cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Infection,
    Recovery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub kind: EventKind,
}

/// Event-driven engine for one realization of the weighted SIR chain.
///
/// For a sparse graph each susceptible vertex carries its current infection
/// rate `(lambda/n) rho(v) sum_{u ~ v infective} rho(u)` in a sum tree, updated
/// in O(degree log n) per event. On the implicit complete graph every
/// susceptible vertex sees the full infective weight `V`, so the tree holds
/// `rho(v)` and the infection total is `(lambda/n) V * sum rho`.
pub struct Engine<'a> {
    graph: &'a Graph,
    weights: &'a WeightAssignment,
    rate_scale: f64,
    states: Vec<VertexState>,
    pressure: Vec<f64>,
    infective_neighbors: Vec<u32>,
    tree: SumTree,
    infectives: Vec<u32>,
    slot: Vec<u32>,
    infective_weight: f64,
    s_by_class: Vec<u64>,
    i_by_class: Vec<u64>,
    susceptible: u64,
    removed: u64,
    time: f64,
    events: u64,
    since_refresh: u64,
    rng: SimRng,
}

impl<'a> Engine<'a> {
    pub fn new(
        graph: &'a Graph,
        weights: &'a WeightAssignment,
        params: &ModelParams,
        init: &StateVector,
        seed: u64,
    ) -> Result<Self> {
        let n = graph.n();
        if weights.len() != n || init.len() != n {
            return Err(Error::Dimension(format!(
                "graph has {n} vertices, weights {}, initial states {}",
                weights.len(),
                init.len()
            )));
        }
        if params.n != n {
            return Err(Error::Dimension(format!(
                "model parameters are for n = {}, graph has {n} vertices",
                params.n
            )));
        }
        let k = weights.num_classes();
        let mut engine = Self {
            graph,
            weights,
            rate_scale: params.lambda / n as f64,
            states: init.as_slice().to_vec(),
            pressure: vec![0.0; n],
            infective_neighbors: vec![0; n],
            tree: SumTree::new(n),
            infectives: Vec::new(),
            slot: vec![u32::MAX; n],
            infective_weight: 0.0,
            s_by_class: vec![0; k],
            i_by_class: vec![0; k],
            susceptible: 0,
            removed: 0,
            time: 0.0,
            events: 0,
            since_refresh: 0,
            rng: rng_from_seed(seed),
        };
        for v in 0..n {
            let c = weights.class_of()[v] as usize;
            match engine.states[v] {
                VertexState::Susceptible => {
                    engine.susceptible += 1;
                    engine.s_by_class[c] += 1;
                }
                VertexState::Infective => {
                    engine.slot[v] = engine.infectives.len() as u32;
                    engine.infectives.push(v as u32);
                    engine.i_by_class[c] += 1;
                }
                VertexState::Removed => engine.removed += 1,
            }
        }
        engine.refresh();
        Ok(engine)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    pub fn states(&self) -> &[VertexState] {
        &self.states
    }

    pub fn susceptible_count(&self) -> u64 {
        self.susceptible
    }

    pub fn infective_count(&self) -> u64 {
        self.infectives.len() as u64
    }

    pub fn removed_count(&self) -> u64 {
        self.removed
    }

    /// Current infection rate of vertex `v` as held by the engine.
    pub fn vertex_rate(&self, v: usize) -> f64 {
        let leaf = self.tree.nodes[self.tree.cap + v];
        if self.graph.is_complete() {
            leaf * self.rate_scale * self.infective_weight
        } else {
            leaf
        }
    }

    /// Recompute every incrementally maintained quantity from the states.
    pub fn refresh(&mut self) {
        let rho = self.weights.values();
        self.infective_weight = self.infectives.iter().map(|&u| rho[u as usize]).sum();
        if self.graph.is_complete() {
            let states = &self.states;
            self.tree.rebuild((0..states.len()).map(|v| {
                if states[v] == VertexState::Susceptible {
                    rho[v]
                } else {
                    0.0
                }
            }));
        } else {
            self.pressure.iter_mut().for_each(|x| *x = 0.0);
            self.infective_neighbors.iter_mut().for_each(|x| *x = 0);
            for &u in &self.infectives {
                let u = u as usize;
                for &w in self.graph.adjacency(u).unwrap() {
                    let w = w as usize;
                    if self.states[w] == VertexState::Susceptible {
                        self.pressure[w] += rho[u];
                        self.infective_neighbors[w] += 1;
                    }
                }
            }
            let (states, pressure, scale) = (&self.states, &self.pressure, self.rate_scale);
            self.tree.rebuild((0..states.len()).map(|v| {
                if states[v] == VertexState::Susceptible {
                    scale * rho[v] * pressure[v]
                } else {
                    0.0
                }
            }));
        }
        self.since_refresh = 0;
    }

    fn infection_total(&self) -> f64 {
        if self.graph.is_complete() {
            if self.infectives.is_empty() {
                0.0
            } else {
                self.rate_scale * self.infective_weight * self.tree.total()
            }
        } else {
            self.tree.total()
        }
    }

    /// Total jump rate: infection pressure plus one per infective vertex.
    pub fn total_rate(&self) -> f64 {
        self.infection_total() + self.infectives.len() as f64
    }

    /// Draw the waiting time to the next event, or `None` if absorbed.
    fn draw_wait(&mut self) -> Option<f64> {
        let total = self.total_rate();
        if total > 0.0 {
            let e: f64 = self.rng.sample(Exp1);
            Some(e / total)
        } else {
            None
        }
    }

    /// Select and apply the next event at time `at`.
    fn fire(&mut self, at: f64) -> Event {
        let recovery_total = self.infectives.len() as f64;
        let infection_total = self.infection_total();
        let x = self.rng.random::<f64>() * (recovery_total + infection_total);
        let event = if x < recovery_total || infection_total <= 0.0 {
            let idx = (x as usize).min(self.infectives.len() - 1);
            let v = self.infectives[idx] as usize;
            self.recover(v);
            Event {
                time: at,
                vertex: v,
                kind: EventKind::Recovery,
            }
        } else {
            let mut y = (x - recovery_total).max(0.0);
            if self.graph.is_complete() {
                y /= self.rate_scale * self.infective_weight;
            }
            let v = self.tree.find(y);
            self.infect(v);
            Event {
                time: at,
                vertex: v,
                kind: EventKind::Infection,
            }
        };
        self.time = at;
        self.events += 1;
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.refresh();
        }
        event
    }

    /// Advance by one event. Returns `None` once no event can occur.
    pub fn step(&mut self) -> Option<Event> {
        let wait = self.draw_wait()?;
        let at = self.time + wait;
        Some(self.fire(at))
    }

    /// Run until no infective vertex remains.
    pub fn run_to_extinction(&mut self) {
        while self.step().is_some() {}
    }

    fn infect(&mut self, v: usize) {
        debug_assert_eq!(self.states[v], VertexState::Susceptible);
        let rho = self.weights.values();
        let c = self.weights.class_of()[v] as usize;
        self.states[v] = VertexState::Infective;
        self.susceptible -= 1;
        self.s_by_class[c] -= 1;
        self.i_by_class[c] += 1;
        self.slot[v] = self.infectives.len() as u32;
        self.infectives.push(v as u32);
        self.infective_weight += rho[v];
        self.tree.set(v, 0.0);
        if self.graph.is_complete() {
            return;
        }
        let rv = rho[v];
        for &w in self.graph.adjacency(v).unwrap() {
            let w = w as usize;
            if self.states[w] != VertexState::Susceptible {
                continue;
            }
            self.infective_neighbors[w] += 1;
            if rv != 0.0 {
                self.pressure[w] += rv;
                self.tree.set(w, self.rate_scale * rho[w] * self.pressure[w]);
            }
        }
    }

    fn recover(&mut self, v: usize) {
        debug_assert_eq!(self.states[v], VertexState::Infective);
        let rho = self.weights.values();
        let c = self.weights.class_of()[v] as usize;
        self.states[v] = VertexState::Removed;
        self.removed += 1;
        self.i_by_class[c] -= 1;
        let idx = self.slot[v] as usize;
        self.infectives.swap_remove(idx);
        if let Some(&moved) = self.infectives.get(idx) {
            self.slot[moved as usize] = idx as u32;
        }
        self.slot[v] = u32::MAX;
        if self.infectives.is_empty() {
            self.infective_weight = 0.0;
        } else {
            self.infective_weight -= rho[v];
        }
        if self.graph.is_complete() {
            return;
        }
        let rv = rho[v];
        for &w in self.graph.adjacency(v).unwrap() {
            let w = w as usize;
            if self.states[w] != VertexState::Susceptible {
                continue;
            }
            self.infective_neighbors[w] -= 1;
            if self.infective_neighbors[w] == 0 {
                self.pressure[w] = 0.0;
            } else if rv != 0.0 {
                self.pressure[w] -= rv;
            } else {
                continue;
            }
            self.tree.set(w, self.rate_scale * rho[w] * self.pressure[w]);
        }
    }

    /// Observables of the current state.
    pub fn snapshot(&self, t: f64, recording: Recording) -> Snapshot {
        let classes = self.weights.class_values();
        let infective = self.infectives.len() as u64;
        match recording {
            Recording::Aggregate => {
                let rho = self.weights.values();
                let v = self.infectives.iter().map(|&u| rho[u as usize]).sum();
                Snapshot {
                    t,
                    susceptible: self.susceptible,
                    infective,
                    removed: self.removed,
                    v,
                    s_by_class: Vec::new(),
                    i_by_class: Vec::new(),
                    cross: Vec::new(),
                }
            }
            Recording::Full => {
                let k = classes.len();
                let v = classes
                    .iter()
                    .zip(&self.i_by_class)
                    .map(|(q, &i)| q * i as f64)
                    .sum();
                let mut cross = vec![0u64; k * k];
                if self.graph.is_complete() {
                    for j in 0..k {
                        for l in 0..k {
                            cross[j * k + l] = self.s_by_class[j] * self.i_by_class[l];
                        }
                    }
                } else {
                    let class_of = self.weights.class_of();
                    for &u in &self.infectives {
                        let l = class_of[u as usize] as usize;
                        for &w in self.graph.adjacency(u as usize).unwrap() {
                            if self.states[w as usize] == VertexState::Susceptible {
                                cross[class_of[w as usize] as usize * k + l] += 1;
                            }
                        }
                    }
                }
                Snapshot {
                    t,
                    susceptible: self.susceptible,
                    infective,
                    removed: self.removed,
                    v,
                    s_by_class: self.s_by_class.clone(),
                    i_by_class: self.i_by_class.clone(),
                    cross,
                }
            }
        }
    }

    /// Run forward, snapshotting at each observation time the state just
    /// before the first event that exceeds it.
    pub fn observe(&mut self, obs_times: &[f64], recording: Recording) -> Vec<Snapshot> {
        let mut out = Vec::with_capacity(obs_times.len());
        let mut next = 0;
        while next < obs_times.len() {
            let Some(wait) = self.draw_wait() else {
                break;
            };
            let at = self.time + wait;
            while next < obs_times.len() && obs_times[next] < at {
                out.push(self.snapshot(obs_times[next], recording));
                next += 1;
            }
            if next == obs_times.len() {
                break;
            }
            self.fire(at);
        }
        for &t in &obs_times[next..] {
            out.push(self.snapshot(t, recording));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_tree_find_skips_zero_leaves() {
        let mut t = SumTree::new(5);
        t.rebuild([0.0, 1.0, 0.0, 2.0, 0.0].into_iter());
        assert_eq!(t.total(), 3.0);
        assert_eq!(t.find(0.0), 1);
        assert_eq!(t.find(0.999), 1);
        assert_eq!(t.find(1.0), 3);
        assert_eq!(t.find(2.99), 3);
        // Past the total: still lands on a positive leaf.
        assert_eq!(t.find(10.0), 3);
        t.set(3, 0.0);
        assert_eq!(t.find(2.0), 1);
    }

    #[test]
    fn single_leaf_tree() {
        let mut t = SumTree::new(1);
        t.set(0, 4.0);
        assert_eq!(t.total(), 4.0);
        assert_eq!(t.find(3.0), 0);
    }
}
