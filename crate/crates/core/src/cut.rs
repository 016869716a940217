//! Nonnegative combinations of cut pseudometrics.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::VertexSet;
use crate::error::{invalid, Result};

/// A finite cut measure on `0..n`. Sides never contain vertex 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CutMeasure {
    n: usize,
    cuts: Vec<(VertexSet, f64)>,
}

#[derive(Serialize, Deserialize)]
struct CutJson {
    side: Vec<usize>,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    n: usize,
    cuts: Vec<CutJson>,
}

impl CutMeasure {
    pub fn new(n: usize) -> Self {
        CutMeasure { n, cuts: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn cuts(&self) -> &[(VertexSet, f64)] {
        &self.cuts
    }

    pub fn total_weight(&self) -> f64 {
        self.cuts.iter().map(|c| c.1).sum()
    }

    /// Adds `w` times the cut of `side`. Trivial cuts and zero weights are
    /// dropped; returns whether the cut was kept.
    pub fn push(&mut self, side: VertexSet, w: f64) -> bool {
        assert_eq!(side.universe(), self.n, "cut universe mismatch");
        assert!(w >= 0.0 && w.is_finite(), "cut weight {w}");
        let side = if side.contains(0) { side.complement() } else { side };
        if w == 0.0 || side.is_empty() || side.count() == self.n {
            return false;
        }
        self.cuts.push((side, w));
        true
    }

    pub fn extend(&mut self, other: &CutMeasure) {
        assert_eq!(self.n, other.n);
        self.cuts.extend(other.cuts.iter().cloned());
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.cuts {
            c.1 *= factor;
        }
    }

    /// Merges identical sides; output sorted by side.
    pub fn compact(&mut self) {
        let mut merged: BTreeMap<VertexSet, f64> = BTreeMap::new();
        for (s, w) in self.cuts.drain(..) {
            *merged.entry(s).or_insert(0.0) += w;
        }
        self.cuts = merged.into_iter().collect();
    }

    /// Pulls the measure back along `map`: local vertex `i` becomes `map[i]`
    /// sides are read off at the images. Result lives on `0..map.len()`.
    pub fn pullback(&self, map: &[usize]) -> CutMeasure {
        let mut out = CutMeasure::new(map.len());
        for (s, w) in &self.cuts {
            let side = VertexSet::from_iter(map.len(), (0..map.len()).filter(|&i| s.contains(map[i])));
            out.push(side, *w);
        }
        out
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.cuts.iter().filter(|(s, _)| s.contains(x) != s.contains(y)).map(|c| c.1).sum()
    }

    /// Full distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        // group cuts by weight, then count separations with bit tricks
        let mut groups: HashMap<u64, Vec<&VertexSet>> = HashMap::new();
        for (s, w) in &self.cuts {
            groups.entry(w.to_bits()).or_default().push(s);
        }
        let mut keys: Vec<u64> = groups.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let w = f64::from_bits(key);
            let sides = &groups[&key];
            let words = sides.len().div_ceil(64);
            let mut rows = vec![0u64; n * words];
            for (k, s) in sides.iter().enumerate() {
                for v in s.iter() {
                    rows[v * words + k / 64] |= 1 << (k % 64);
                }
            }
            for x in 0..n {
                for y in x + 1..n {
                    let a = &rows[x * words..(x + 1) * words];
                    let b = &rows[y * words..(y + 1) * words];
                    let sep: u32 = a.iter().zip(b).map(|(p, q)| (p ^ q).count_ones()).sum();
                    if sep > 0 {
                        d[x * n + y] += w * sep as f64;
                        d[y * n + x] = d[x * n + y];
                    }
                }
            }
        }
        d
    }

    pub fn to_json(&self) -> String {
        let raw = MeasureJson {
            n: self.n,
            cuts: self.cuts.iter().map(|(s, w)| CutJson { side: s.iter().collect(), w: *w }).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("measure serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson = serde_json::from_str(text)?;
        let mut m = CutMeasure::new(raw.n);
        for c in raw.cuts {
            if c.side.iter().any(|&v| v >= raw.n) {
                return Err(invalid("cut side outside vertex range"));
            }
            if !(c.w >= 0.0 && c.w.is_finite()) {
                return Err(invalid(format!("bad cut weight {}", c.w)));
            }
            m.push(VertexSet::from_iter(raw.n, c.side), c.w);
        }
        Ok(m)
    }
}

/// Distance between `x` and `y` under `mu`.
pub fn cut_measure_distance(mu: &CutMeasure, x: usize, y: usize) -> f64 {
    mu.distance(x, y)
}

/// One block of a 1-sum: a measure on the block's local vertices and the
/// global id of every local vertex.
#[derive(Debug, Clone)]
pub struct GluePart {
    pub measure: CutMeasure,
    pub global: Vec<usize>,
}

/// Glues block measures along shared vertices. The blocks must form a tree
/// (block / shared-vertex incidence) covering `0..n`.
pub fn one_sum_glue(parts: &[GluePart], n: usize) -> Result<CutMeasure> {
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (b, p) in parts.iter().enumerate() {
        if p.global.len() != p.measure.n() {
            return Err(invalid(format!("block {b}: map size differs from measure size")));
        }
        for &g in &p.global {
            if g >= n {
                return Err(invalid(format!("block {b}: vertex {g} outside 0..{n}")));
            }
            if owners[g].last() == Some(&b) {
                return Err(invalid(format!("block {b}: vertex {g} listed twice")));
            }
            owners[g].push(b);
        }
    }
    if let Some(v) = owners.iter().position(|o| o.is_empty()) {
        return Err(invalid(format!("vertex {v} belongs to no block")));
    }
    // incidence graph: blocks plus shared vertices
    let shared: Vec<usize> = (0..n).filter(|&v| owners[v].len() > 1).collect();
    let links: usize = shared.iter().map(|&v| owners[v].len()).sum();
    if !parts.is_empty() && links != parts.len() + shared.len() - 1 {
        return Err(invalid("blocks do not form a tree"));
    }
    // port[b][g]: vertex of block b through which g is reached
    let mut out = CutMeasure::new(n);
    for (b, part) in parts.iter().enumerate() {
        let mut port = vec![usize::MAX; n];
        let mut block_seen = vec![false; parts.len()];
        block_seen[b] = true;
        let mut stack = Vec::new();
        for (local, &g) in part.global.iter().enumerate() {
            port[g] = local;
            for &nb in &owners[g] {
                if !block_seen[nb] {
                    block_seen[nb] = true;
                    stack.push((nb, local));
                }
            }
        }
        while let Some((blk, via)) = stack.pop() {
            for &g in &parts[blk].global {
                if port[g] == usize::MAX {
                    port[g] = via;
                }
                for &nb in &owners[g] {
                    if !block_seen[nb] {
                        block_seen[nb] = true;
                        stack.push((nb, via));
                    }
                }
            }
        }
        if port.contains(&usize::MAX) {
            return Err(invalid("blocks do not form a connected tree"));
        }
        for (side, w) in part.measure.cuts() {
            let glued = VertexSet::from_iter(n, (0..n).filter(|&g| side.contains(port[g])));
            out.push(glued, *w);
        }
    }
    Ok(out)
}
