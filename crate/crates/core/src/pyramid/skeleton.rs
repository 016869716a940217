use std::cmp::Ordering;
use std::sync::Arc;

use super::{ensure_valid, validate_pyramid, Pyramid};
use crate::error::Result;

pub(crate) const NONE: u32 = u32::MAX;

/// Validated pyramid with its tree of parent edges and index tables.
///
/// Internally vertices are numbered layer by layer, left to right, so the
/// children of any vertex form a contiguous index range.
#[derive(Debug)]
pub struct Skeleton {
    pyramid: Pyramid,
    pub(crate) id_of: Vec<usize>,
    pub(crate) idx_of: Vec<u32>,
    pub(crate) layer_start: Vec<u32>,
    pub(crate) depth: Vec<u32>,
    pub(crate) parent: Vec<u32>,
    pub(crate) child_lo: Vec<u32>,
    pub(crate) child_hi: Vec<u32>,
    pub(crate) pre: Vec<u32>,
    pub(crate) end: Vec<u32>,
    up: Vec<Vec<u32>>,
    down_left: Vec<Vec<u32>>,
    down_right: Vec<Vec<u32>>,
    /// For internal `u` whose right neighbour `u + 1` shares its layer:
    /// depth(u) - depth(nca(u, u + 1)); zero otherwise.
    pub(crate) split: Vec<u32>,
}

/// Position of two vertices in the left-to-right order of rays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayOrder {
    Before,
    After,
    SameRay,
}

impl Skeleton {
    pub fn new(p: &Pyramid) -> Result<Arc<Skeleton>> {
        ensure_valid(validate_pyramid(p))?;
        Ok(Arc::new(Self::build(p)))
    }

    fn build(p: &Pyramid) -> Skeleton {
        let n = p.n();
        let id_of: Vec<usize> = p.layers.iter().flatten().copied().collect();
        let mut idx_of = vec![0u32; n];
        for (i, &v) in id_of.iter().enumerate() {
            idx_of[v] = i as u32;
        }
        let mut layer_start = Vec::with_capacity(p.depth() + 1);
        let mut depth = vec![0u32; n];
        let mut acc = 0u32;
        for (i, layer) in p.layers.iter().enumerate() {
            layer_start.push(acc);
            for k in 0..layer.len() {
                depth[acc as usize + k] = i as u32 + 1;
            }
            acc += layer.len() as u32;
        }
        layer_start.push(acc);
        let mut parent = vec![NONE; n];
        let mut child_lo = vec![NONE; n];
        let mut child_hi = vec![NONE; n];
        for u in 1..n {
            let pu = idx_of[p.parent[&id_of[u]]];
            parent[u] = pu;
            if child_lo[pu as usize] == NONE {
                child_lo[pu as usize] = u as u32;
            }
            child_hi[pu as usize] = u as u32 + 1;
        }
        // preorder with children visited left to right
        let mut pre = vec![0u32; n];
        let mut end = vec![0u32; n];
        let mut stack: Vec<(u32, bool)> = vec![(0, false)];
        let mut clock = 0u32;
        while let Some((u, done)) = stack.pop() {
            if done {
                end[u as usize] = clock;
                continue;
            }
            pre[u as usize] = clock;
            clock += 1;
            stack.push((u, true));
            if child_lo[u as usize] != NONE {
                for c in (child_lo[u as usize]..child_hi[u as usize]).rev() {
                    stack.push((c, false));
                }
            }
        }
        let levels = (usize::BITS - p.depth().max(1).leading_zeros()) as usize;
        let mut up = vec![parent.clone()];
        let mut down_left = vec![child_lo.clone()];
        let mut down_right: Vec<Vec<u32>> =
            vec![child_hi.iter().map(|&h| if h == NONE { NONE } else { h - 1 }).collect()];
        for k in 1..levels {
            let jump = |t: &Vec<u32>| -> Vec<u32> {
                t.iter().map(|&m| if m == NONE { NONE } else { t[m as usize] }).collect()
            };
            up.push(jump(&up[k - 1]));
            down_left.push(jump(&down_left[k - 1]));
            down_right.push(jump(&down_right[k - 1]));
        }
        let mut skel = Skeleton {
            pyramid: p.clone(),
            id_of,
            idx_of,
            layer_start,
            depth,
            parent,
            child_lo,
            child_hi,
            pre,
            end,
            up,
            down_left,
            down_right,
            split: vec![0; n],
        };
        for u in 0..n.saturating_sub(1) {
            if skel.depth[u] == skel.depth[u + 1] {
                let z = skel.nca_idx(u as u32, u as u32 + 1);
                skel.split[u] = skel.depth[u] - skel.depth[z as usize];
            }
        }
        skel
    }

    pub fn pyramid(&self) -> &Pyramid {
        &self.pyramid
    }

    pub fn n(&self) -> usize {
        self.id_of.len()
    }

    /// Number of layers.
    pub fn height(&self) -> usize {
        self.layer_start.len() - 1
    }

    pub fn basepoint(&self) -> usize {
        self.id_of[0]
    }

    /// Layer number of `v`, starting at 1 for the basepoint.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[self.idx_of[v] as usize] as usize
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[self.idx_of[v] as usize];
        (p != NONE).then(|| self.id_of[p as usize])
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let u = self.idx_of[v] as usize;
        let (lo, hi) = if self.child_lo[u] == NONE { (0, 0) } else { (self.child_lo[u], self.child_hi[u]) };
        (lo..hi).map(move |c| self.id_of[c as usize])
    }

    /// Vertices of layer `i` (1-based) in order.
    pub fn layer(&self, i: usize) -> &[usize] {
        &self.pyramid.layers[i - 1]
    }

    /// Position of `v` within its layer.
    pub fn position(&self, v: usize) -> usize {
        let u = self.idx_of[v] as usize;
        u - self.layer_start[self.depth[u] as usize - 1] as usize
    }

    pub(crate) fn ancestor_idx(&self, mut u: u32, mut steps: u32) -> u32 {
        let mut k = 0;
        while steps > 0 && u != NONE {
            if steps & 1 == 1 {
                u = self.up[k][u as usize];
            }
            steps >>= 1;
            k += 1;
        }
        u
    }

    pub(crate) fn nca_idx(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let (da, db) = (self.depth[a as usize], self.depth[b as usize]);
        if da > db {
            a = self.ancestor_idx(a, da - db);
        } else {
            b = self.ancestor_idx(b, db - da);
        }
        if a == b {
            return a;
        }
        for k in (0..self.up.len()).rev() {
            let (pa, pb) = (self.up[k][a as usize], self.up[k][b as usize]);
            if pa != pb {
                a = pa;
                b = pb;
            }
        }
        self.parent[a as usize]
    }

    /// Nearest common ancestor in the skeleton.
    pub fn nca(&self, x: usize, y: usize) -> usize {
        self.id_of[self.nca_idx(self.idx_of[x], self.idx_of[y]) as usize]
    }

    /// Whether `a` is `d` or one of its ancestors.
    pub fn is_ancestor(&self, a: usize, d: usize) -> bool {
        let (a, d) = (self.idx_of[a] as usize, self.idx_of[d] as usize);
        self.pre[a] <= self.pre[d] && self.pre[d] < self.end[a]
    }

    /// Path length between two vertices in the skeleton tree.
    pub fn tree_distance(&self, x: usize, y: usize) -> usize {
        let z = self.nca(x, y);
        self.depth(x) + self.depth(y) - 2 * self.depth(z)
    }

    /// Leftmost and rightmost descendants (internal, inclusive) of `u`
    /// exactly `steps` layers below; `steps` must not pass the last layer.
    pub(crate) fn descendant_span(&self, u: u32, steps: u32) -> (u32, u32) {
        let (mut lo, mut hi, mut s, mut k) = (u, u, steps, 0);
        while s > 0 {
            if s & 1 == 1 {
                lo = self.down_left[k][lo as usize];
                hi = self.down_right[k][hi as usize];
            }
            s >>= 1;
            k += 1;
        }
        debug_assert!(lo != NONE && hi != NONE);
        (lo, hi)
    }

    /// Root-to-`v` path.
    pub fn root_path(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub(crate) fn cmp_idx(&self, a: u32, b: u32) -> RayOrder {
        let (a, b) = (a as usize, b as usize);
        if (self.pre[a] <= self.pre[b] && self.pre[b] < self.end[a])
            || (self.pre[b] <= self.pre[a] && self.pre[a] < self.end[b])
        {
            return RayOrder::SameRay;
        }
        match self.pre[a].cmp(&self.pre[b]) {
            Ordering::Less => RayOrder::Before,
            _ => RayOrder::After,
        }
    }
}

/// Compares two vertices along the left-to-right order of rays. Vertices on
/// a common root-to-leaf ray (one an ancestor of the other) are `SameRay`.
pub fn order_compare(skel: &Skeleton, x: usize, y: usize) -> RayOrder {
    skel.cmp_idx(skel.idx_of[x], skel.idx_of[y])
}

/// Descendants of `u` (itself included) at most `radius` layers below,
/// stopping at the last layer. Returned in internal order.
pub fn descendant_ball(skel: &Skeleton, u: usize, radius: f64) -> Vec<usize> {
    let k = radius.max(0.0).floor() as u32;
    let ui = skel.idx_of[u];
    let room = skel.height() as u32 - skel.depth[ui as usize];
    let mut out = vec![u];
    for s in 1..=k.min(room) {
        let (lo, hi) = skel.descendant_span(ui, s);
        out.extend((lo..=hi).map(|i| skel.id_of[i as usize]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Literal definition: same layer by position, otherwise compare the
    /// children of the nca that lead to each vertex.
    fn order_by_definition(s: &Skeleton, x: usize, y: usize) -> RayOrder {
        if s.is_ancestor(x, y) || s.is_ancestor(y, x) {
            return RayOrder::SameRay;
        }
        if s.depth(x) == s.depth(y) {
            return if s.position(x) < s.position(y) { RayOrder::Before } else { RayOrder::After };
        }
        let z = s.nca(x, y);
        let px = s.root_path(x);
        let py = s.root_path(y);
        let d = s.depth(z);
        let (cx, cy) = (px[d], py[d]);
        if s.position(cx) < s.position(cy) {
            RayOrder::Before
        } else {
            RayOrder::After
        }
    }

    #[test]
    fn order_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p = Pyramid::random(6, 7, &mut rng);
            let s = Skeleton::new(&p).unwrap();
            for x in 0..p.n() {
                for y in 0..p.n() {
                    assert_eq!(order_compare(&s, x, y), order_by_definition(&s, x, y));
                }
            }
        }
    }

    #[test]
    fn nca_and_tree_distance_on_grid() {
        let s = Skeleton::new(&Pyramid::grid(4)).unwrap();
        assert_eq!(s.nca(5, 6), 0);
        assert_eq!(s.tree_distance(5, 6), 6);
        assert_eq!(s.nca(1, 5), 1);
        assert_eq!(order_compare(&s, 3, 6), RayOrder::Before);
        assert_eq!(order_compare(&s, 1, 5), RayOrder::SameRay);
    }

    #[test]
    fn ball_truncates_at_last_layer() {
        let s = Skeleton::new(&Pyramid::grid(4)).unwrap();
        assert_eq!(descendant_ball(&s, 0, 1.9), vec![0, 1, 2]);
        assert_eq!(descendant_ball(&s, 3, 10.0), vec![3, 5]);
        assert_eq!(descendant_ball(&s, 3, 0.5), vec![3]);
    }
}
