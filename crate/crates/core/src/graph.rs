//! Weighted undirected graphs, shortest paths and finite metrics.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used when validating metric axioms.
pub const METRIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

/// Undirected graph on `0..n` with positive edge lengths.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    unweighted: bool,
    adj: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    #[serde(default)]
    unweighted: bool,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let unweighted = edges.iter().all(|e| e.len == 1.0);
        Self::build(n, edges, unweighted)
    }

    /// Graph whose edges all have unit length.
    pub fn unweighted(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges = pairs.into_iter().map(|(u, v)| Edge { u, v, len: 1.0 }).collect();
        Self::build(n, edges, true)
    }

    fn build(n: usize, edges: Vec<Edge>, unweighted: bool) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(invalid(format!("edge ({}, {}) outside 0..{n}", e.u, e.v)));
            }
            if e.u == e.v {
                return Err(invalid(format!("self-loop at {}", e.u)));
            }
            if !(e.len > 0.0 && e.len.is_finite()) {
                return Err(invalid(format!("edge ({}, {}) has length {}", e.u, e.v, e.len)));
            }
            if unweighted && e.len != 1.0 {
                return Err(invalid("unweighted graph with non-unit length"));
            }
            adj[e.u].push((e.v, e.len));
            adj[e.v].push((e.u, e.len));
        }
        Ok(Graph { n, edges, unweighted, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].iter().any(|&(w, _)| w == v)
    }

    /// Subgraph induced by `keep`, relabelled in the order given.
    pub fn induced(&self, keep: &[usize]) -> Result<Graph> {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
            .map(|e| Edge { u: local[e.u], v: local[e.v], len: e.len })
            .collect();
        Graph::build(keep.len(), edges, self.unweighted)
    }

    /// Connected components as a label per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(w, _) in &self.adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn disconnected_witnesses(&self) -> Option<Vec<usize>> {
        let comp = self.components();
        let k = comp.iter().copied().max().map_or(0, |m| m + 1);
        if k <= 1 {
            return None;
        }
        let mut wit = vec![usize::MAX; k];
        for (v, &c) in comp.iter().enumerate() {
            if wit[c] == usize::MAX {
                wit[c] = v;
            }
        }
        Some(wit)
    }

    /// Single-source distances (BFS when unweighted, Dijkstra otherwise).
    pub fn distances_from(&self, s: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.n];
        dist[s] = 0.0;
        if self.unweighted {
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(w, _) in &self.adj[u] {
                    if dist[w].is_infinite() {
                        dist[w] = dist[u] + 1.0;
                        q.push_back(w);
                    }
                }
            }
            return dist;
        }
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Dist(0.0), s)));
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(w, len) in &self.adj[u] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse((Dist(nd), w)));
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> String {
        let raw = GraphJson {
            n: self.n,
            unweighted: self.unweighted,
            edges: self.edges.iter().map(|e| (e.u, e.v, e.len)).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let raw: GraphJson = serde_json::from_str(text)?;
        let edges = raw.edges.into_iter().map(|(u, v, len)| Edge { u, v, len }).collect();
        Graph::build(raw.n, edges, raw.unweighted)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// All-pairs shortest paths. Fails on disconnected graphs.
pub fn apsp(g: &Graph) -> Result<FiniteMetric> {
    if let Some(witnesses) = g.disconnected_witnesses() {
        return Err(Error::Disconnected { witnesses });
    }
    let n = g.n;
    let mut d = Vec::with_capacity(n * n);
    for s in 0..n {
        d.extend(g.distances_from(s));
    }
    Ok(FiniteMetric { n, d })
}

/// Symmetric distance matrix satisfying the metric axioms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    n: usize,
    d: Vec<Vec<f64>>,
}

impl FiniteMetric {
    /// Validates symmetry, zero diagonal, positivity and the triangle inequality.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(invalid(format!("expected {} entries, got {}", n * n, d.len())));
        }
        let m = FiniteMetric { n, d };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::NotMetric(format!("d({i},{i}) = {}", self.get(i, i))));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NotMetric(format!("d({i},{j}) = {v}")));
                }
                if i != j && v == 0.0 {
                    return Err(Error::NotMetric(format!("d({i},{j}) = 0")));
                }
                if (v - self.get(j, i)).abs() > METRIC_TOL {
                    return Err(Error::NotMetric(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if self.get(i, j) > self.get(i, k) + self.get(k, j) + METRIC_TOL {
                        return Err(Error::NotMetric(format!("triangle ({i},{k},{j}) violated")));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Metric on the listed points, in that order.
    pub fn restrict(&self, points: &[usize]) -> FiniteMetric {
        let k = points.len();
        let mut d = Vec::with_capacity(k * k);
        for &a in points {
            for &b in points {
                d.push(self.get(a, b));
            }
        }
        FiniteMetric { n: k, d }
    }

    pub fn to_json(&self) -> String {
        let raw = MetricJson { n: self.n, d: (0..self.n).map(|i| self.row(i).to_vec()).collect() };
        serde_json::to_string_pretty(&raw).expect("metric serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MetricJson = serde_json::from_str(text)?;
        if raw.d.len() != raw.n || raw.d.iter().any(|r| r.len() != raw.n) {
            return Err(invalid("metric matrix is not n x n"));
        }
        FiniteMetric::new(raw.n, raw.d.concat())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bellman_ford(n: usize, edges: &[Edge], s: usize) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; n];
        d[s] = 0.0;
        for _ in 0..n {
            for e in edges {
                if d[e.u] + e.len < d[e.v] {
                    d[e.v] = d[e.u] + e.len;
                }
                if d[e.v] + e.len < d[e.u] {
                    d[e.u] = d[e.v] + e.len;
                }
            }
        }
        d
    }

    fn random_connected(rng: &mut ChaCha8Rng, n: usize, weighted: bool) -> Vec<Edge> {
        let mut edges = Vec::new();
        let len = |rng: &mut ChaCha8Rng| if weighted { rng.gen_range(1..10) as f64 / 2.0 } else { 1.0 };
        for v in 1..n {
            let u = rng.gen_range(0..v);
            let l = len(rng);
            edges.push(Edge { u, v, len: l });
        }
        for _ in 0..n {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v {
                let l = len(rng);
                edges.push(Edge { u, v, len: l });
            }
        }
        edges
    }

    #[test]
    fn apsp_matches_bellman_ford_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let n = rng.gen_range(1..=12);
            let edges = random_connected(&mut rng, n, trial % 2 == 0);
            let g = Graph::new(n, edges.clone()).unwrap();
            let m = apsp(&g).unwrap();
            for s in 0..n {
                assert_eq!(m.row(s), bellman_ford(n, &edges, s).as_slice());
            }
        }
    }

    #[test]
    fn disconnected_names_each_component() {
        let g = Graph::unweighted(5, [(0, 1), (2, 3)]).unwrap();
        match apsp(&g) {
            Err(Error::Disconnected { witnesses }) => assert_eq!(witnesses, vec![0, 2, 4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_metric() {
        assert!(FiniteMetric::new(3, vec![0., 1., 5., 1., 0., 1., 5., 1., 0.]).is_err());
        assert!(FiniteMetric::new(2, vec![0., 1., 2., 0.]).is_err());
        assert!(FiniteMetric::new(2, vec![0., 1., 1., 0.]).is_ok());
    }

    #[test]
    fn json_roundtrip() {
        let g = Graph::new(3, vec![Edge { u: 0, v: 1, len: 2.5 }, Edge { u: 1, v: 2, len: 1.0 }]).unwrap();
        let h = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g.edges(), h.edges());
        let m = apsp(&g).unwrap();
        assert_eq!(FiniteMetric::from_json(&m.to_json()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn apsp_is_a_metric(seed in 0u64..1000, n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = Graph::new(n, random_connected(&mut rng, n, true)).unwrap();
            let m = apsp(&g).unwrap();
            prop_assert!(FiniteMetric::new(n, m.d.clone()).is_ok());
        }
    }
}
