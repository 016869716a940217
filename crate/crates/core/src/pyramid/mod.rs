//! Pyramids, funnels, their skeletons and monotone cuts.

mod cut;
mod frontier;
mod skeleton;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use cut::{boundary, evolve, shift, CutBoundary, MonotoneCut, Parity, StepChoice};
pub use frontier::{Frontier, StepScratch};
pub use skeleton::{descendant_ball, order_compare, RayOrder, Skeleton};

/// Layered graph whose layers are paths. `parent` maps every vertex outside
/// the first layer to its unique neighbour one layer up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pyramid {
    pub layers: Vec<Vec<usize>>,
    pub parent: BTreeMap<usize, usize>,
}

/// Like [`Pyramid`] but layers with three or more vertices close into cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub layers: Vec<Vec<usize>>,
    pub parent: BTreeMap<usize, usize>,
    #[serde(default = "yes")]
    pub cyclic: bool,
}

fn yes() -> bool {
    true
}

/// A failed structural condition with the vertices that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 0 for malformed input, otherwise the numbered layered-graph condition.
    pub condition: u8,
    pub detail: String,
    pub witnesses: Vec<usize>,
}

impl Pyramid {
    pub fn n(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Number of layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn basepoint(&self) -> usize {
        self.layers[0][0]
    }

    pub fn to_graph(&self) -> Result<Graph> {
        layered_graph(&self.layers, &self.parent, false)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pyramid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds a pyramid with ids in layer order; `counts[i][k]` is the number
    /// of children of the `k`-th vertex of layer `i`.
    pub fn from_child_counts(counts: &[Vec<usize>]) -> Pyramid {
        let (layers, parent) = layers_from_counts(counts);
        Pyramid { layers, parent }
    }

    /// Grid pyramid: apex over a two-wide ladder with `delta - 1` rows.
    pub fn grid(delta: usize) -> Pyramid {
        assert!(delta >= 1);
        let mut counts = Vec::new();
        if delta >= 2 {
            counts.push(vec![2]);
            for _ in 2..delta {
                counts.push(vec![1, 1]);
            }
        }
        Pyramid::from_child_counts(&counts)
    }

    /// A single path of `delta` vertices.
    pub fn single_ray(delta: usize) -> Pyramid {
        assert!(delta >= 1);
        Pyramid::from_child_counts(&vec![vec![1]; delta - 1])
    }

    /// Random pyramid with layers no wider than `max_width`. Each vertex
    /// gets one to three children while the width allows.
    pub fn random<R: Rng>(delta: usize, max_width: usize, rng: &mut R) -> Pyramid {
        Pyramid::from_child_counts(&random_counts(delta, max_width.max(1), rng))
    }

    /// Subdivides every edge once. Returns the refined pyramid and the id of
    /// each original vertex inside it. Distances between original vertices
    /// double exactly.
    pub fn subdivide(&self) -> Result<(Pyramid, Vec<usize>)> {
        let skel = Skeleton::new(self)?;
        let depth = self.depth();
        let mut layers: Vec<Vec<usize>> = Vec::with_capacity(2 * depth - 1);
        let mut parent = BTreeMap::new();
        let mut image = vec![usize::MAX; self.n()];
        let mut next = 0usize;
        // main layer for original layer 0
        let mut fresh = |count: usize| {
            let v: Vec<usize> = (next..next + count).collect();
            next += count;
            v
        };
        let top = fresh(1);
        image[self.layers[0][0]] = top[0];
        layers.push(top);
        for i in 1..depth {
            let above = &self.layers[i - 1];
            let here = &self.layers[i];
            let above_main = layers.last().unwrap().clone();
            // positions in the refined layer above: vertex k at 2k, midpoint at 2k+1
            let pos_above = |v: usize| -> usize { 2 * above.iter().position(|&a| a == v).unwrap() };
            let w = here.len();
            let mid_layer = fresh(2 * w - 1);
            for k in 0..w {
                let p = skel.parent(here[k]).unwrap();
                parent.insert(mid_layer[2 * k], above_main[pos_above(p)]);
                if k + 1 < w {
                    let q = skel.parent(here[k + 1]).unwrap();
                    let target = if p == q { pos_above(p) } else { pos_above(p) + 1 };
                    parent.insert(mid_layer[2 * k + 1], above_main[target]);
                }
            }
            let main = fresh(2 * w - 1);
            for (j, &v) in main.iter().enumerate() {
                parent.insert(v, mid_layer[j]);
            }
            for k in 0..w {
                image[here[k]] = main[2 * k];
            }
            layers.push(mid_layer);
            layers.push(main);
        }
        Ok((Pyramid { layers, parent }, image))
    }
}

impl Funnel {
    pub fn n(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn basepoint(&self) -> usize {
        self.layers[0][0]
    }

    pub fn to_graph(&self) -> Result<Graph> {
        layered_graph(&self.layers, &self.parent, true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("funnel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_child_counts(counts: &[Vec<usize>]) -> Funnel {
        let (layers, parent) = layers_from_counts(counts);
        Funnel { layers, parent, cyclic: true }
    }

    /// Random funnel, same shape law as [`Pyramid::random`].
    pub fn random<R: Rng>(delta: usize, max_width: usize, rng: &mut R) -> Funnel {
        Funnel::from_child_counts(&random_counts(delta, max_width.max(1), rng))
    }

    /// Funnel whose layers after the first all have `width` vertices.
    pub fn cylinder(delta: usize, width: usize) -> Funnel {
        assert!(delta >= 1 && width >= 1);
        let mut counts = Vec::new();
        if delta >= 2 {
            counts.push(vec![width]);
            for _ in 2..delta {
                counts.push(vec![1; width]);
            }
        }
        Funnel::from_child_counts(&counts)
    }
}

fn layers_from_counts(counts: &[Vec<usize>]) -> (Vec<Vec<usize>>, BTreeMap<usize, usize>) {
    let mut layers = vec![vec![0usize]];
    let mut parent = BTreeMap::new();
    let mut next = 1;
    for (i, row) in counts.iter().enumerate() {
        assert_eq!(row.len(), layers[i].len(), "layer {i}: one count per vertex");
        let mut layer = Vec::new();
        for (k, &c) in row.iter().enumerate() {
            for _ in 0..c {
                parent.insert(next, layers[i][k]);
                layer.push(next);
                next += 1;
            }
        }
        layers.push(layer);
    }
    (layers, parent)
}

fn random_counts<R: Rng>(delta: usize, max_width: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut counts = Vec::new();
    let mut width = 1;
    for _ in 1..delta {
        let mut row = Vec::with_capacity(width);
        let mut total = 0;
        for k in 0..width {
            let remaining_parents = width - k - 1;
            let room = max_width.saturating_sub(total + remaining_parents).max(1);
            let c = rng.gen_range(1..=3usize).min(room);
            row.push(c);
            total += c;
        }
        width = total;
        counts.push(row);
    }
    counts
}

/// The graph of a layered structure: parent edges plus layer adjacency.
pub(crate) fn layered_graph(layers: &[Vec<usize>], parent: &BTreeMap<usize, usize>, cyclic: bool) -> Result<Graph> {
    let n: usize = layers.iter().map(Vec::len).sum();
    let mut pairs: Vec<(usize, usize)> = parent.iter().map(|(&c, &p)| (p, c)).collect();
    for layer in layers {
        for w in layer.windows(2) {
            pairs.push((w[0], w[1]));
        }
        if cyclic && layer.len() >= 3 {
            pairs.push((layer[layer.len() - 1], layer[0]));
        }
    }
    Graph::unweighted(n, pairs)
}

/// Checks the five pyramid conditions. Empty means valid.
pub fn validate_pyramid(p: &Pyramid) -> Vec<Violation> {
    validate_layered(&p.layers, &p.parent, false)
}

/// Checks the funnel conditions (cyclic layers, cyclic order preservation).
pub fn validate_funnel(f: &Funnel) -> Vec<Violation> {
    validate_layered(&f.layers, &f.parent, true)
}

fn violation(condition: u8, detail: impl Into<String>, witnesses: Vec<usize>) -> Violation {
    Violation { condition, detail: detail.into(), witnesses }
}

fn validate_layered(layers: &[Vec<usize>], parent: &BTreeMap<usize, usize>, cyclic: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    let n: usize = layers.iter().map(Vec::len).sum();
    // ids must be exactly 0..n, each once
    let mut layer_of = vec![usize::MAX; n];
    let mut pos_of = vec![0usize; n];
    for (i, layer) in layers.iter().enumerate() {
        if layer.is_empty() {
            out.push(violation(1, format!("layer {} is empty", i + 1), vec![]));
        }
        for (k, &v) in layer.iter().enumerate() {
            if v >= n {
                out.push(violation(0, format!("vertex id {v} outside 0..{n}"), vec![v]));
            } else if layer_of[v] != usize::MAX {
                out.push(violation(1, format!("vertex {v} appears twice"), vec![v]));
            } else {
                layer_of[v] = i;
                pos_of[v] = k;
            }
        }
    }
    if layers.is_empty() {
        out.push(violation(1, "no layers", vec![]));
        return out;
    }
    if !out.is_empty() {
        return out;
    }
    if layers[0].len() != 1 {
        out.push(violation(1, "first layer must be a single basepoint", layers[0].clone()));
    }
    for (&c, &p) in parent {
        if c >= n || p >= n {
            out.push(violation(0, format!("parent entry {c} -> {p} outside 0..{n}"), vec![c.min(n), p.min(n)]));
        }
    }
    if !out.is_empty() {
        return out;
    }
    // condition 3: unique neighbour in the previous layer
    for (i, layer) in layers.iter().enumerate() {
        for &v in layer {
            match (i, parent.get(&v)) {
                (0, Some(&p)) => out.push(violation(3, format!("basepoint {v} has parent {p}"), vec![v, p])),
                (0, None) => {}
                (_, None) => out.push(violation(3, format!("vertex {v} has no parent"), vec![v])),
                (_, Some(&p)) if layer_of[p] + 1 != i => {
                    out.push(violation(3, format!("parent {p} of {v} is not one layer up"), vec![v, p]))
                }
                _ => {}
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    // condition 4: every vertex above the last layer has a child
    let mut has_child = vec![false; n];
    for &p in parent.values() {
        has_child[p] = true;
    }
    for layer in &layers[..layers.len() - 1] {
        for &v in layer {
            if !has_child[v] {
                out.push(violation(4, format!("vertex {v} has no child"), vec![v]));
            }
        }
    }
    // condition 5: parents keep the layer order (cyclically for funnels)
    for layer in layers.iter().skip(1) {
        let pos: Vec<usize> = layer.iter().map(|v| pos_of[parent[v]]).collect();
        let mut descents: Vec<usize> = (0..pos.len().saturating_sub(1)).filter(|&k| pos[k + 1] < pos[k]).collect();
        if cyclic && pos.len() >= 3 && pos[0] < pos[pos.len() - 1] {
            descents.push(pos.len() - 1);
        }
        let allowed = usize::from(cyclic);
        if descents.len() > allowed {
            let witnesses = descents.iter().flat_map(|&k| [layer[k], layer[(k + 1) % layer.len()]]).collect();
            out.push(violation(5, "parents do not preserve the layer order", witnesses));
        }
    }
    // condition 2: removing a layer separates the layers above from below
    if let Ok(g) = layered_graph(layers, parent, cyclic) {
        for cut in 1..layers.len().saturating_sub(1) {
            let mut seen = vec![false; n];
            let mut stack = vec![layers[0][0]];
            seen[layers[0][0]] = true;
            while let Some(u) = stack.pop() {
                for &(w, _) in g.neighbors(u) {
                    if !seen[w] && layer_of[w] != cut {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            let leaked: Vec<usize> = (0..n).filter(|&v| seen[v] && layer_of[v] > cut).collect();
            if !leaked.is_empty() {
                out.push(violation(2, format!("layer {} does not separate", cut + 1), leaked));
            }
        }
    }
    out
}

pub(crate) fn ensure_valid(v: Vec<Violation>) -> Result<()> {
    match v.first() {
        None => Ok(()),
        Some(first) => Err(Error::Structure(format!(
            "condition {} fails: {} (witnesses {:?}){}",
            first.condition,
            first.detail,
            first.witnesses,
            if v.len() > 1 { format!(" and {} more", v.len() - 1) } else { String::new() }
        ))),
    }
}
