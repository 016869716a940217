//! Independent checks: the cut-cone LP for c1, sparsest cut versus maximum
//! concurrent flow, and the parity helper.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::VertexSet;
use crate::cut::CutMeasure;
use crate::distortion::distortion;
use crate::embed::sample_rng;
use crate::error::{invalid, Error, Result};
use crate::graph::{FiniteMetric, Graph};
use crate::lp::{LinearProgram, Relation};

/// Largest metric accepted by [`c1_lp`].
pub const C1_MAX_POINTS: usize = 12;
/// Limits for [`maxflow_concurrent`].
pub const FLOW_MAX_VERTICES: usize = 20;
pub const FLOW_MAX_DEMANDS: usize = 30;
/// Largest instance for which [`gap`] enumerates every cut.
pub const GAP_MAX_VERTICES: usize = 16;

/// Optimal L1 distortion of a small metric with a witnessing cut measure.
#[derive(Debug, Clone)]
pub struct C1Result {
    pub c_star: f64,
    pub witness: CutMeasure,
    /// Distortion of the witness measured directly.
    pub witness_distortion: f64,
}

/// Solves the cut-cone LP: minimise `c` such that some cut measure `y`
/// satisfies `d ≤ Σ y_S δ_S ≤ c · d` on every pair.
pub fn c1_lp(metric: &FiniteMetric) -> Result<C1Result> {
    let n = metric.n();
    if n > C1_MAX_POINTS {
        return Err(Error::TooLarge(format!("c1_lp needs n ≤ {C1_MAX_POINTS}, got {n}")));
    }
    if n <= 1 {
        return Ok(C1Result { c_star: 1.0, witness: CutMeasure::new(n), witness_distortion: 1.0 });
    }
    let norm = metric.diameter();
    let cuts: Vec<u32> = (1..(1u32 << (n - 1))).map(|m| m << 1).collect();
    let c_var = cuts.len();
    let mut lp = LinearProgram::new(cuts.len() + 1);
    lp.objective[c_var] = 1.0;
    for x in 0..n {
        for y in x + 1..n {
            let d = metric.get(x, y) / norm;
            let sep: Vec<(usize, f64)> =
                cuts.iter().enumerate().filter(|(_, &s)| (s >> x & 1) != (s >> y & 1)).map(|(k, _)| (k, 1.0)).collect();
            lp.add(sep.clone(), Relation::Ge, d);
            let mut upper = sep;
            upper.push((c_var, -d));
            lp.add(upper, Relation::Le, 0.0);
        }
    }
    let sol = lp.solve()?;
    let mut witness = CutMeasure::new(n);
    for (k, &s) in cuts.iter().enumerate() {
        if sol.x[k] > 1e-12 {
            witness.push(VertexSet::from_iter(n, (0..n).filter(|&v| s >> v & 1 == 1)), sol.x[k] * norm);
        }
    }
    let witness_distortion = distortion(metric, &witness.distance_matrix())?.distortion;
    Ok(C1Result { c_star: sol.x[c_var], witness, witness_distortion })
}

/// Capacities on graph edges and demands between vertex pairs.
#[derive(Debug, Clone)]
pub struct FlowInstance {
    pub graph: Graph,
    /// One capacity per graph edge, in edge order.
    pub capacity: Vec<f64>,
    pub demands: Vec<(usize, usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct FlowJson {
    graph: serde_json::Value,
    cap: Vec<(usize, usize, f64)>,
    dem: Vec<(usize, usize, f64)>,
}

impl FlowInstance {
    pub fn new(graph: Graph, capacity: Vec<f64>, demands: Vec<(usize, usize, f64)>) -> Result<Self> {
        if capacity.len() != graph.edges().len() {
            return Err(invalid("one capacity per edge required"));
        }
        if capacity.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(invalid("capacities must be finite and nonnegative"));
        }
        for &(s, t, dem) in &demands {
            if s >= graph.n() || t >= graph.n() || s == t || !(dem >= 0.0 && dem.is_finite()) {
                return Err(invalid(format!("bad demand ({s}, {t}, {dem})")));
            }
        }
        Ok(FlowInstance { graph, capacity, demands })
    }

    /// Unit capacity on every edge, unit demand on the listed pairs.
    pub fn uniform(graph: Graph, pairs: &[(usize, usize)]) -> Result<Self> {
        let cap = vec![1.0; graph.edges().len()];
        Self::new(graph, cap, pairs.iter().map(|&(s, t)| (s, t, 1.0)).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FlowJson = serde_json::from_str(text)?;
        let graph = Graph::from_json(&raw.graph.to_string())?;
        let mut capacity = vec![0.0; graph.edges().len()];
        for (u, v, c) in raw.cap {
            let k = graph
                .edges()
                .iter()
                .position(|e| (e.u, e.v) == (u, v) || (e.u, e.v) == (v, u))
                .ok_or_else(|| invalid(format!("capacity on missing edge ({u}, {v})")))?;
            capacity[k] = c;
        }
        Self::new(graph, capacity, raw.dem)
    }

    pub fn to_json(&self) -> String {
        let graph: serde_json::Value = serde_json::from_str(&self.graph.to_json()).expect("graph json");
        let raw = FlowJson {
            graph,
            cap: self.graph.edges().iter().zip(&self.capacity).map(|(e, &c)| (e.u, e.v, c)).collect(),
            dem: self.demands.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("flow serializes")
    }
}

/// Crossing capacity over crossing demand; infinite when no demand crosses.
pub fn sparsity(inst: &FlowInstance, side: &VertexSet) -> f64 {
    let cap: f64 = inst
        .graph
        .edges()
        .iter()
        .zip(&inst.capacity)
        .filter(|(e, _)| side.contains(e.u) != side.contains(e.v))
        .map(|(_, &c)| c)
        .sum();
    let dem: f64 = inst.demands.iter().filter(|(s, t, _)| side.contains(*s) != side.contains(*t)).map(|d| d.2).sum();
    if dem == 0.0 {
        f64::INFINITY
    } else {
        cap / dem
    }
}

/// Largest `ε` such that every demand can be routed at `ε` times its size
/// simultaneously within the capacities.
pub fn maxflow_concurrent(inst: &FlowInstance) -> Result<f64> {
    let n = inst.graph.n();
    let k = inst.demands.len();
    if n > FLOW_MAX_VERTICES || k > FLOW_MAX_DEMANDS {
        return Err(Error::TooLarge(format!(
            "flow LP limited to {FLOW_MAX_VERTICES} vertices and {FLOW_MAX_DEMANDS} demands"
        )));
    }
    if inst.demands.iter().all(|d| d.2 == 0.0) {
        return Err(invalid("no positive demand"));
    }
    let edges = inst.graph.edges();
    let m = edges.len();
    let var = |c: usize, e: usize, forward: bool| (c * m + e) * 2 + usize::from(!forward);
    let eps = k * m * 2;
    let mut lp = LinearProgram::new(eps + 1);
    lp.objective[eps] = -1.0;
    for (c, &(s, t, dem)) in inst.demands.iter().enumerate() {
        for v in (0..n).filter(|&v| v != t) {
            let mut row = Vec::new();
            for (e, edge) in edges.iter().enumerate() {
                if edge.u == v {
                    row.push((var(c, e, true), 1.0));
                    row.push((var(c, e, false), -1.0));
                } else if edge.v == v {
                    row.push((var(c, e, true), -1.0));
                    row.push((var(c, e, false), 1.0));
                }
            }
            if v == s {
                row.push((eps, -dem));
            }
            lp.add(row, Relation::Eq, 0.0);
        }
    }
    for (e, &cap) in inst.capacity.iter().enumerate() {
        let row = (0..k).flat_map(|c| [(var(c, e, true), 1.0), (var(c, e, false), 1.0)]).collect();
        lp.add(row, Relation::Le, cap);
    }
    Ok(lp.solve()?.x[eps])
}

/// Flow-cut gap of one instance.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub min_sparsity: f64,
    pub best_cut: Vec<usize>,
    pub epsilon: f64,
    pub gap: f64,
    /// Every enumerated cut has sparsity at least `epsilon` (up to 1e-6).
    pub weak_duality: bool,
    pub cuts_checked: usize,
}

pub fn gap(inst: &FlowInstance) -> Result<GapReport> {
    let n = inst.graph.n();
    if n > GAP_MAX_VERTICES {
        return Err(Error::TooLarge(format!("cut enumeration limited to {GAP_MAX_VERTICES} vertices")));
    }
    let epsilon = maxflow_concurrent(inst)?;
    let mut min_sparsity = f64::INFINITY;
    let mut best_cut = Vec::new();
    let mut weak_duality = true;
    let mut cuts_checked = 0;
    for mask in 1u32..(1 << n.saturating_sub(1)) {
        let side = VertexSet::from_iter(n, (0..n - 1).filter(|&v| mask >> v & 1 == 1).map(|v| v + 1));
        let s = sparsity(inst, &side);
        cuts_checked += 1;
        if s < epsilon - 1e-6 {
            weak_duality = false;
        }
        if s < min_sparsity {
            min_sparsity = s;
            best_cut = side.iter().collect();
        }
    }
    let gap = if epsilon > 0.0 { min_sparsity / epsilon } else { f64::INFINITY };
    Ok(GapReport { min_sparsity, best_cut, epsilon, gap, weak_duality, cuts_checked })
}

/// Probability that a Binomial(k, p) count is odd.
pub fn parity_prob(p: f64, k: u32) -> f64 {
    (1.0 - (1.0 - 2.0 * p).powi(k as i32)) / 2.0
}

/// Monte Carlo frequency of an odd count, one stream per sample.
pub fn parity_monte_carlo(p: f64, k: u32, samples: usize, seed: u64) -> f64 {
    let mut rng = sample_rng(seed, 0);
    let mut odd = 0usize;
    for _ in 0..samples {
        let c = (0..k).filter(|_| rng.gen::<f64>() < p).count();
        odd += c & 1;
    }
    odd as f64 / samples as f64
}

/// Largest `c` with `parity_prob(p, k) ≥ min(1/4, c p k)` on the grid.
pub fn tightest_parity_constant(ps: &[f64], ks: &[u32]) -> f64 {
    let mut c = f64::INFINITY;
    for &p in ps {
        for &k in ks {
            let q = parity_prob(p, k);
            if q < 0.25 {
                c = c.min(q / (p * k as f64));
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::apsp;

    fn path(n: usize) -> Graph {
        Graph::unweighted(n, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    #[test]
    fn tree_metric_has_c1_one() {
        let m = apsp(&path(5)).unwrap();
        let r = c1_lp(&m).unwrap();
        assert!((r.c_star - 1.0).abs() < 1e-7);
        assert!((r.witness_distortion - r.c_star).abs() < 1e-6);
    }

    #[test]
    fn k23_needs_distortion() {
        // K_{2,3} with unit edges; 4/3 cross-checked with scipy's linprog
        let g = Graph::unweighted(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        let r = c1_lp(&apsp(&g).unwrap()).unwrap();
        assert!((r.c_star - 4.0 / 3.0).abs() < 1e-7, "{}", r.c_star);
        assert!((r.witness_distortion - r.c_star).abs() < 1e-6);
    }

    #[test]
    fn path_flow_gap_is_one() {
        let inst = FlowInstance::uniform(path(4), &[(0, 3), (1, 2)]).unwrap();
        let r = gap(&inst).unwrap();
        assert!((r.epsilon - 0.5).abs() < 1e-9);
        assert!((r.gap - 1.0).abs() < 1e-9);
        assert!(r.weak_duality);
    }

    #[test]
    fn sparsity_without_demand_is_infinite() {
        let inst = FlowInstance::uniform(path(3), &[(0, 1)]).unwrap();
        assert!(sparsity(&inst, &VertexSet::from_iter(3, [2])).is_infinite());
    }

    #[test]
    fn flow_json_roundtrip() {
        let inst = FlowInstance::uniform(path(3), &[(0, 2)]).unwrap();
        let back = FlowInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back.capacity, inst.capacity);
        assert_eq!(back.demands, inst.demands);
    }

    #[test]
    fn parity_closed_form() {
        assert_eq!(parity_prob(0.5, 3), 0.5);
        assert_eq!(parity_prob(1.0, 2), 0.0);
        assert!((parity_prob(0.1, 1) - 0.1).abs() < 1e-15);
        let c = tightest_parity_constant(&[0.01, 0.1, 0.25, 0.5], &[1, 2, 3, 8]);
        assert!(c > 0.5 && c <= 1.0);
    }
}
