use std::sync::Arc;

use rand::Rng;

use super::cut::{draw, MonotoneCut, Parity};
use super::skeleton::Skeleton;
use crate::bits::VertexSet;
use crate::radius::Radius;

/// Compact form of a monotone cut: its boundary vertices (internal indices)
/// in ray order. The cut is everything on the root paths of these vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Frontier {
    verts: Vec<u32>,
}

impl Frontier {
    /// Frontier of the ball of radius `j - 1` around the basepoint: layer `j`.
    pub fn layer(skel: &Skeleton, j: usize) -> Frontier {
        let lo = skel.layer_start[j - 1];
        let hi = skel.layer_start[j];
        Frontier { verts: (lo..hi).collect() }
    }

    pub fn from_cut(cut: &MonotoneCut) -> Frontier {
        let s = cut.skeleton();
        let bd = super::boundary(cut);
        Frontier { verts: bd.vertices.iter().map(|&v| s.idx_of[v]).collect() }
    }

    pub fn to_cut(&self, skel: &Arc<Skeleton>) -> MonotoneCut {
        let n = skel.n();
        let mut members = VertexSet::new(n);
        for &b in &self.verts {
            let mut u = b;
            loop {
                let id = skel.id_of[u as usize];
                if members.contains(id) {
                    break;
                }
                members.insert(id);
                u = skel.parent[u as usize];
                if u == super::skeleton::NONE {
                    break;
                }
            }
        }
        MonotoneCut::from_parts(skel.clone(), members)
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Boundary vertex ids in ray order.
    pub fn boundary_ids(&self, skel: &Skeleton) -> Vec<usize> {
        self.verts.iter().map(|&u| skel.id_of[u as usize]).collect()
    }

    #[inline]
    pub(crate) fn contains_idx(&self, skel: &Skeleton, x: u32) -> bool {
        let px = skel.pre[x as usize];
        let k = self.verts.partition_point(|&b| skel.pre[b as usize] < px);
        k < self.verts.len() && skel.pre[self.verts[k] as usize] < skel.end[x as usize]
    }

    /// Whether vertex `v` lies in the cut.
    pub fn contains(&self, skel: &Skeleton, v: usize) -> bool {
        self.contains_idx(skel, skel.idx_of[v])
    }

    /// Whether `v` is a boundary vertex.
    pub fn on_boundary(&self, skel: &Skeleton, v: usize) -> bool {
        let u = skel.idx_of[v];
        let pu = skel.pre[u as usize];
        self.verts.binary_search_by_key(&pu, |&b| skel.pre[b as usize]).is_ok()
    }

    /// Positions `k` whose boundary edge (`k`, `k + 1`) has split depth in `[r, 6r)`.
    pub fn candidates(&self, skel: &Skeleton, r: Radius, out: &mut Vec<usize>) {
        out.clear();
        for k in 0..self.verts.len().saturating_sub(1) {
            let u = self.verts[k];
            if self.verts[k + 1] == u + 1 && r.window_contains(skel.split[u as usize] as usize) {
                out.push(k);
            }
        }
    }

    /// Applies a shift. `cut_after[k]` marks a piece break between positions
    /// `k` and `k + 1`.
    pub fn apply(&self, skel: &Skeleton, r: Radius, cut_after: &[bool], parity: Parity) -> Frontier {
        let steps = r.floor() as u32;
        if steps == 0 {
            return self.clone();
        }
        let height = skel.height() as u32;
        let mut verts = Vec::with_capacity(self.verts.len() * 2);
        let mut piece = 1usize;
        for (k, &u) in self.verts.iter().enumerate() {
            if k > 0 && cut_after[k - 1] {
                piece += 1;
            }
            let room = height - skel.depth[u as usize];
            let s = steps.min(room);
            if s > 0 && parity.advances(piece) {
                let (lo, hi) = skel.descendant_span(u, s);
                verts.extend(lo..=hi);
            } else {
                verts.push(u);
            }
        }
        Frontier { verts }
    }

    /// One random evolution step; consumes randomness exactly like
    /// [`super::evolve`].
    pub fn step<R: Rng>(&self, skel: &Skeleton, r: Radius, p: f64, rng: &mut R, scratch: &mut StepScratch) -> Frontier {
        self.candidates(skel, r, &mut scratch.cand);
        let parity = draw(rng, scratch.cand.len(), p, &mut scratch.keep);
        scratch.cut_after.clear();
        scratch.cut_after.resize(self.verts.len(), false);
        for (i, &k) in scratch.cand.iter().enumerate() {
            if scratch.keep[i] {
                scratch.cut_after[k] = true;
            }
        }
        self.apply(skel, r, &scratch.cut_after, parity)
    }
}

/// Reusable buffers for [`Frontier::step`].
#[derive(Debug, Default)]
pub struct StepScratch {
    cand: Vec<usize>,
    keep: Vec<bool>,
    cut_after: Vec<bool>,
}
