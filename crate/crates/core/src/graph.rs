//! Erdős–Rényi graphs, cross-edge counts between vertex sets and a sampled
//! proxy for the worst-case cross-edge deviation.

use std::io::{BufRead, Write};

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Above this vertex count `generate_er` switches from one Bernoulli draw per
/// pair to geometric skip sampling.
pub const PAIRWISE_SAMPLING_MAX_N: usize = 20_000;

/// Undirected simple graph on `0..n`.
///
/// The complete graph is kept implicit so that the all-edges fixture stays
/// cheap at large `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edge_count: u64,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Complete,
    /// `targets[offsets[v]..offsets[v + 1]]` are the sorted neighbors of `v`.
    Csr { offsets: Vec<usize>, targets: Vec<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSampler {
    Pairwise,
    Skip,
}

impl Graph {
    /// Build from an undirected edge list. Self-loops and duplicates are rejected.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::Domain(format!("n = {n} exceeds u32 vertex ids")));
        }
        let mut degree = vec![0usize; n];
        for &(a, b) in edges {
            if a == b {
                return Err(Error::Precondition(format!("self-loop at vertex {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::Precondition(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        for &(a, b) in edges {
            targets[fill[a as usize]] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for v in 0..n {
            let row = &mut targets[offsets[v]..offsets[v + 1]];
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Precondition(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Self {
            n,
            edge_count: edges.len() as u64,
            repr: Repr::Csr { offsets, targets },
        })
    }

    /// The complete graph, stored implicitly.
    pub fn complete(n: usize) -> Self {
        let n64 = n as u64;
        Self {
            n,
            edge_count: n64 * n64.saturating_sub(1) / 2,
            repr: Repr::Complete,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.repr, Repr::Complete)
    }

    /// Sorted neighbor slice, or `None` for the implicit complete graph.
    #[inline]
    pub fn adjacency(&self, v: usize) -> Option<&[u32]> {
        match &self.repr {
            Repr::Complete => None,
            Repr::Csr { offsets, targets } => Some(&targets[offsets[v]..offsets[v + 1]]),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        match &self.repr {
            Repr::Complete => self.n - 1,
            Repr::Csr { offsets, .. } => offsets[v + 1] - offsets[v],
        }
    }

    pub fn neighbors(&self, v: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.repr {
            Repr::Complete => Box::new((0..self.n).filter(move |&u| u != v)),
            Repr::Csr { .. } => Box::new(self.adjacency(v).unwrap().iter().map(|&u| u as usize)),
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.n || b >= self.n {
            return false;
        }
        match &self.repr {
            Repr::Complete => true,
            Repr::Csr { .. } => self.adjacency(a).unwrap().binary_search(&(b as u32)).is_ok(),
        }
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// Write the `n m` header followed by one `i j` line per edge, `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n, self.edge_count)?;
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Config { line, message };
        let mut lines = input.lines().enumerate();
        let (n, m) = loop {
            let Some((idx, line)) = lines.next() else {
                return Err(bad(1, "missing `n m` header".into()));
            };
            let line = line.map_err(|e| bad(idx + 1, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(n)), Some(Ok(m)), None) => break (n as usize, m),
                _ => return Err(bad(idx + 1, format!("expected `n m`, got `{line}`"))),
            }
        };
        let mut edges = Vec::with_capacity(m as usize);
        for (idx, line) in lines {
            let line = line.map_err(|e| bad(idx + 1, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) if i < j && (j as usize) < n => edges.push((i, j)),
                _ => {
                    return Err(bad(
                        idx + 1,
                        format!("expected `i j` with i < j < {n}, got `{line}`"),
                    ))
                }
            }
        }
        if edges.len() as u64 != m {
            return Err(bad(1, format!("header announces {m} edges, found {}", edges.len())));
        }
        Self::from_edges(n, &edges)
    }
}

/// Sample `G(n, p)`; deterministic in `seed`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    let sampler = if n <= PAIRWISE_SAMPLING_MAX_N {
        EdgeSampler::Pairwise
    } else {
        EdgeSampler::Skip
    };
    generate_er_with(n, p, seed, sampler)
}

pub fn generate_er_with(n: usize, p: f64, seed: u64, sampler: EdgeSampler) -> Result<Graph> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("edge probability p = {p} must lie in (0,1)")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity((pairs * p * 1.05 + 16.0) as usize);
    match sampler {
        EdgeSampler::Pairwise => {
            // p * 2^64, compared against a raw 64-bit draw.
            let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
            for i in 0..n as u32 {
                for j in i + 1..n as u32 {
                    if rng.next_u64() < threshold {
                        edges.push((i, j));
                    }
                }
            }
        }
        EdgeSampler::Skip => {
            // Batagelj–Brandes: pairs (w, v), w < v, enumerated row by row in v.
            let log_q = (1.0 - p).ln();
            let (mut v, mut w) = (1usize, -1i64);
            while v < n {
                let r: f64 = rng.random();
                w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
                while w >= v as i64 && v < n {
                    w -= v as i64;
                    v += 1;
                }
                if v < n {
                    edges.push((w as u32, v as u32));
                }
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Number of edges joining `c` and `d`. The sets must be disjoint.
pub fn cross_edges(g: &Graph, c: &[usize], d: &[usize]) -> Result<u64> {
    let mut in_d = vec![false; g.n()];
    for &v in d {
        if v >= g.n() {
            return Err(Error::Precondition(format!("vertex {v} out of range")));
        }
        in_d[v] = true;
    }
    for &v in c {
        if v >= g.n() {
            return Err(Error::Precondition(format!("vertex {v} out of range")));
        }
        if in_d[v] {
            return Err(Error::Precondition(format!("vertex {v} lies in both sets")));
        }
    }
    Ok(count_into(g, c, d.len(), &in_d))
}

fn count_into(g: &Graph, c: &[usize], d_len: usize, in_d: &[bool]) -> u64 {
    if g.is_complete() {
        return (c.len() * d_len) as u64;
    }
    c.iter()
        .map(|&v| {
            g.adjacency(v)
                .unwrap()
                .iter()
                .filter(|&&u| in_d[u as usize])
                .count() as u64
        })
        .sum()
}

/// Sampled lower bound on the worst cross-edge deviation: the maximum over
/// `trials` random disjoint pairs with `|C| = ceil(c n)`, `|D| = ceil(d n)` of
/// `|alpha(C, D) - |C| |D| p|`. Successive trials follow one seed stream, so the
/// estimate is nondecreasing in `trials`.
pub fn estimate_beta(g: &Graph, p: f64, c: f64, d: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0 && d > 0.0 && d <= 1.0) {
        return Err(Error::Domain(format!("fractions c = {c}, d = {d} must lie in (0,1]")));
    }
    let n = g.n();
    let size_c = (c * n as f64).ceil() as usize;
    let size_d = (d * n as f64).ceil() as usize;
    if size_c + size_d > n {
        return Err(Error::Precondition(format!(
            "disjoint sets of sizes {size_c} and {size_d} do not fit in {n} vertices"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut in_d = vec![false; n];
    let mean = (size_c * size_d) as f64 * p;
    let mut best = 0.0f64;
    for _ in 0..trials {
        for k in 0..size_c + size_d {
            let pick = rng.random_range(k..n);
            perm.swap(k, pick);
        }
        let (cs, rest) = perm.split_at(size_c);
        let ds = &rest[..size_d];
        for &v in ds {
            in_d[v] = true;
        }
        let alpha = count_into(g, cs, size_d, &in_d) as f64;
        for &v in ds {
            in_d[v] = false;
        }
        best = best.max((alpha - mean).abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_invariants(g: &Graph) {
        let mut total = 0u64;
        for v in 0..g.n() {
            let nb: Vec<usize> = g.neighbors(v).collect();
            assert!(nb.windows(2).all(|w| w[0] < w[1]), "sorted, no duplicates");
            for &u in &nb {
                assert_ne!(u, v);
                assert!(g.has_edge(u, v));
            }
            total += nb.len() as u64;
        }
        assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn single_vertex_graph_is_empty() {
        let g = generate_er(1, 0.3, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn rejects_bad_p() {
        assert!(matches!(generate_er(5, 0.0, 1), Err(Error::Domain(_))));
        assert!(matches!(generate_er(5, 1.0, 1), Err(Error::Domain(_))));
        assert!(generate_er(5, f64::NAN, 1).is_err());
    }

    #[test]
    fn edge_presence_frequency_n2() {
        let hits = (0..4000u64)
            .filter(|&s| generate_er(2, 0.5, s).unwrap().edge_count() == 1)
            .count() as f64;
        // sd of the count is sqrt(4000/4) ~ 31.6
        assert!((hits - 2000.0).abs() < 4.0 * 31.7, "hits = {hits}");
    }

    #[test]
    fn edge_count_binomial() {
        let (n, p) = (1000usize, 0.01);
        let pairs = (n * (n - 1) / 2) as f64;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        for sampler in [EdgeSampler::Pairwise, EdgeSampler::Skip] {
            let g = generate_er_with(n, p, 9, sampler).unwrap();
            check_invariants(&g);
            assert!((g.edge_count() as f64 - 4995.0).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn samplers_agree_in_distribution() {
        // Mean edge count and mean degree of vertex 0 over 200 samples.
        let (n, p, reps) = (200usize, 0.05, 200u64);
        let pairs = (n * (n - 1) / 2) as f64;
        for sampler in [EdgeSampler::Pairwise, EdgeSampler::Skip] {
            let mut edges = 0.0;
            let mut deg0 = 0.0;
            for s in 0..reps {
                let g = generate_er_with(n, p, 1000 + s, sampler).unwrap();
                edges += g.edge_count() as f64;
                deg0 += g.degree(0) as f64;
            }
            let sd_mean_edges = (pairs * p * (1.0 - p) / reps as f64).sqrt();
            assert!((edges / reps as f64 - pairs * p).abs() < 4.0 * sd_mean_edges);
            let sd_mean_deg = ((n - 1) as f64 * p * (1.0 - p) / reps as f64).sqrt();
            assert!((deg0 / reps as f64 - (n - 1) as f64 * p).abs() < 4.0 * sd_mean_deg);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_er(300, 0.1, 5).unwrap(), generate_er(300, 0.1, 5).unwrap());
        assert_ne!(generate_er(300, 0.1, 5).unwrap(), generate_er(300, 0.1, 6).unwrap());
    }

    #[test]
    fn cross_edge_examples() {
        let g = generate_er(10, 0.5, 3).unwrap();
        assert_eq!(cross_edges(&g, &[], &[1, 2]).unwrap(), 0);
        assert_eq!(cross_edges(&g, &[1, 2], &[]).unwrap(), 0);
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(cross_edges(&k4, &[0, 1], &[2, 3]).unwrap(), 4);
        assert_eq!(cross_edges(&Graph::complete(4), &[0, 1], &[2, 3]).unwrap(), 4);
        assert!(matches!(
            cross_edges(&k4, &[0, 1], &[1, 2]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cross_edges_binomial() {
        let g = generate_er(1000, 0.1, 77).unwrap();
        let c: Vec<usize> = (0..100).collect();
        let d: Vec<usize> = (500..600).collect();
        let sd = (10_000.0f64 * 0.1 * 0.9).sqrt();
        let a = cross_edges(&g, &c, &d).unwrap() as f64;
        assert!((a - 1000.0).abs() < 5.0 * sd, "alpha = {a}");
    }

    #[test]
    fn beta_examples() {
        let g = generate_er(50, 0.2, 1).unwrap();
        assert_eq!(estimate_beta(&g, 0.2, 0.25, 0.25, 0, 1).unwrap(), 0.0);
        assert_eq!(estimate_beta(&Graph::complete(4), 1.0, 0.5, 0.5, 10, 1).unwrap(), 0.0);
        assert!(matches!(
            estimate_beta(&g, 0.2, 0.6, 0.5, 10, 1),
            Err(Error::Precondition(_))
        ));
        let a = estimate_beta(&g, 0.2, 0.25, 0.25, 5, 9).unwrap();
        let b = estimate_beta(&g, 0.2, 0.25, 0.25, 50, 9).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_er(40, 0.2, 11).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("40 {}\n", g.edge_count())));
        let back = Graph::read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(back, g);

        let k3 = Graph::complete(3);
        let mut buf = Vec::new();
        k3.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "3 3\n0 1\n0 2\n1 2\n");
    }

    #[test]
    fn edge_list_errors() {
        assert!(Graph::read_edge_list("".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 1\n1 0\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 2\n0 1\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 2\n0 1\n0 1\n".as_bytes()).is_err());
        assert!(Graph::read_edge_list("3 1\n0 5\n".as_bytes()).is_err());
    }

    fn brute_force(g: &Graph, c: &[usize], d: &[usize]) -> u64 {
        let mut count = 0;
        for &i in c {
            for &j in d {
                if g.has_edge(i, j) {
                    count += 1;
                }
            }
        }
        count
    }

    proptest! {
        #[test]
        fn cross_edge_properties(
            n in 2usize..20,
            seed in any::<u64>(),
            labels in prop::collection::vec(0u8..4, 20),
        ) {
            let g = generate_er(n, 0.4, seed).unwrap();
            check_invariants(&g);
            let set = |k: u8| (0..n).filter(|&v| labels[v] == k).collect::<Vec<_>>();
            let (c, d, e) = (set(0), set(1), set(2));
            let cd = cross_edges(&g, &c, &d).unwrap();
            prop_assert_eq!(cd, brute_force(&g, &c, &d));
            prop_assert_eq!(cd, cross_edges(&g, &d, &c).unwrap());
            let de: Vec<usize> = d.iter().chain(&e).copied().collect();
            prop_assert_eq!(
                cross_edges(&g, &c, &de).unwrap(),
                cd + cross_edges(&g, &c, &e).unwrap()
            );
        }
    }
}
