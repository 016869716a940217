use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::skeleton::{descendant_ball, order_compare, RayOrder, Skeleton};
use crate::bits::VertexSet;
use crate::error::{invalid, Error, Result};
use crate::radius::{EdgeRate, Radius};

/// A parent-closed vertex set containing the basepoint.
#[derive(Debug, Clone)]
pub struct MonotoneCut {
    skel: Arc<Skeleton>,
    members: VertexSet,
}

impl PartialEq for MonotoneCut {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.skel, &other.skel) && self.members == other.members
    }
}

impl MonotoneCut {
    pub fn new(skel: Arc<Skeleton>, members: VertexSet) -> Result<Self> {
        if members.universe() != skel.n() {
            return Err(invalid("cut universe differs from pyramid size"));
        }
        if !members.contains(skel.basepoint()) {
            return Err(Error::Structure("cut misses the basepoint".into()));
        }
        if let Some(v) = members.iter().find(|&v| skel.parent(v).is_some_and(|p| !members.contains(p))) {
            return Err(Error::Structure(format!("cut contains {v} but not its parent")));
        }
        Ok(MonotoneCut { skel, members })
    }

    /// All vertices within `j` layers of the basepoint.
    pub fn ball(skel: Arc<Skeleton>, j: usize) -> Self {
        let n = skel.n();
        let members = VertexSet::from_iter(n, (0..n).filter(|&v| skel.depth(v) <= j));
        MonotoneCut { skel, members }
    }

    pub(crate) fn from_parts(skel: Arc<Skeleton>, members: VertexSet) -> Self {
        MonotoneCut { skel, members }
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skel
    }

    pub fn members(&self) -> &VertexSet {
        &self.members
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(v)
    }

    /// Whether every root-to-leaf ray meets the set in a nonempty prefix.
    pub fn is_ray_prefix(&self) -> bool {
        let s = &self.skel;
        let leaves = s.layer(s.height());
        leaves.iter().all(|&leaf| {
            let path = s.root_path(leaf);
            let k = path.iter().take_while(|&&v| self.members.contains(v)).count();
            k >= 1 && path[k..].iter().all(|&v| !self.members.contains(v))
        })
    }
}

/// Boundary vertices (members with no child inside) in ray order, and the
/// horizontal edges joining two boundary vertices, each as `(earlier, later)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutBoundary {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

pub fn boundary(cut: &MonotoneCut) -> CutBoundary {
    let s = &cut.skel;
    let mut vertices: Vec<usize> =
        cut.members.iter().filter(|&v| s.children(v).all(|c| !cut.members.contains(c))).collect();
    vertices.sort_by_key(|&v| s.pre[s.idx_of[v] as usize]);
    let on_boundary = VertexSet::from_iter(s.n(), vertices.iter().copied());
    let mut edges = Vec::new();
    for &v in &vertices {
        let d = s.depth(v);
        let pos = s.position(v);
        if let Some(&w) = s.layer(d).get(pos + 1) {
            if on_boundary.contains(w) {
                edges.push((v, w));
            }
        }
    }
    edges.sort_by_key(|&(v, _)| s.pre[s.idx_of[v] as usize]);
    CutBoundary { vertices, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// Whether a piece with this 1-based index moves.
    pub fn advances(&self, piece: usize) -> bool {
        (piece % 2 == 1) == (*self == Parity::Odd)
    }
}

/// Advances alternate pieces of the boundary by descendant balls of radius
/// `r`. The boundary is split into pieces just before the later endpoint of
/// every edge of `z`.
pub fn shift(cut: &MonotoneCut, r: Radius, z: &[(usize, usize)], parity: Parity) -> Result<MonotoneCut> {
    let s = &cut.skel;
    let bd = boundary(cut);
    let mut breaks = Vec::with_capacity(z.len());
    for &(a, b) in z {
        let (x, y) = if order_compare(s, a, b) == RayOrder::Before { (a, b) } else { (b, a) };
        if !bd.edges.contains(&(x, y)) {
            return Err(invalid(format!("edge ({a}, {b}) is not a boundary edge")));
        }
        breaks.push(y);
    }
    let mut members = cut.members.clone();
    for &u in &bd.vertices {
        let piece = 1 + breaks.iter().filter(|&&y| y == u || order_compare(s, y, u) == RayOrder::Before).count();
        if parity.advances(piece) {
            for v in descendant_ball(s, u, r.floor() as f64) {
                members.insert(v);
            }
        }
    }
    Ok(MonotoneCut { skel: s.clone(), members })
}

/// Random choices of one evolution step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepChoice {
    pub radius: String,
    /// Boundary edges whose split depth lies in `[r, 6r)`.
    pub candidates: Vec<(usize, usize)>,
    pub chosen: Vec<(usize, usize)>,
    pub parity: Parity,
}

/// Draws the edge subset and the parity. Shared by every sampler so that a
/// given stream produces identical steps.
pub(crate) fn draw<R: Rng>(rng: &mut R, candidates: usize, p: f64, keep: &mut Vec<bool>) -> Parity {
    keep.clear();
    for _ in 0..candidates {
        keep.push(rng.gen::<f64>() < p);
    }
    if rng.gen::<bool>() {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// Split depth of the horizontal edge `(x, y)`: layers from `x` up to the
/// nearest common ancestor.
pub(crate) fn split_depth(s: &Skeleton, x: usize, y: usize) -> usize {
    s.depth(x) - s.depth(s.nca(x, y))
}

/// One random step: candidates are boundary edges whose split depth lies in
/// `[r, 6r)`; each joins with the rate's probability, then a fair coin picks
/// the parity.
pub fn evolve<R: Rng>(cut: &MonotoneCut, r: Radius, rate: EdgeRate, rng: &mut R) -> (MonotoneCut, StepChoice) {
    let s = &cut.skel;
    let bd = boundary(cut);
    let candidates: Vec<(usize, usize)> =
        bd.edges.iter().copied().filter(|&(x, y)| r.window_contains(split_depth(s, x, y))).collect();
    let mut keep = Vec::new();
    let parity = draw(rng, candidates.len(), rate.probability_f64(r), &mut keep);
    let chosen: Vec<(usize, usize)> = candidates.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect();
    let next = if r.floor() == 0 { cut.clone() } else { shift(cut, r, &chosen, parity).expect("chosen edges lie on the boundary") };
    (next, StepChoice { radius: r.to_string(), candidates, chosen, parity })
}

#[cfg(test)]
mod tests {
    use super::super::Pyramid;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_monotone(s: &Arc<Skeleton>, rng: &mut ChaCha8Rng) -> MonotoneCut {
        let mut m = VertexSet::new(s.n());
        m.insert(s.basepoint());
        for i in 2..=s.height() {
            for &v in s.layer(i) {
                if m.contains(s.parent(v).unwrap()) && rng.gen_bool(0.7) {
                    m.insert(v);
                }
            }
        }
        MonotoneCut::new(s.clone(), m).unwrap()
    }

    #[test]
    fn parent_closed_iff_ray_prefix_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        for _ in 0..30 {
            let p = Pyramid::random(rng.gen_range(1..6), 4, &mut rng);
            if p.n() > 16 {
                continue;
            }
            let s = Skeleton::new(&p).unwrap();
            let n = p.n();
            for mask in 0u32..(1 << n) {
                let set = VertexSet::from_iter(n, (0..n).filter(|&v| mask >> v & 1 == 1));
                let cut = MonotoneCut { skel: s.clone(), members: set.clone() };
                let closed = MonotoneCut::new(s.clone(), set).is_ok();
                assert_eq!(closed, cut.is_ray_prefix(), "mask {mask:b}");
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn boundary_is_sorted_antichain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = Pyramid::random(7, 6, &mut rng);
            let s = Skeleton::new(&p).unwrap();
            let cut = random_monotone(&s, &mut rng);
            let bd = boundary(&cut);
            for w in bd.vertices.windows(2) {
                assert_eq!(order_compare(&s, w[0], w[1]), RayOrder::Before);
            }
            for &(x, y) in &bd.edges {
                assert_eq!(s.depth(x), s.depth(y));
                assert_eq!(s.position(x) + 1, s.position(y));
            }
        }
    }

    #[test]
    fn even_shift_with_no_edges_is_identity() {
        let s = Skeleton::new(&Pyramid::grid(5)).unwrap();
        let cut = MonotoneCut::ball(s, 2);
        let same = shift(&cut, Radius::integer(2), &[], Parity::Even).unwrap();
        assert_eq!(same, cut);
        let moved = shift(&cut, Radius::integer(2), &[], Parity::Odd).unwrap();
        assert_eq!(moved.members().count(), 7);
    }

    #[test]
    fn shift_rejects_foreign_edges() {
        let s = Skeleton::new(&Pyramid::grid(4)).unwrap();
        let cut = MonotoneCut::ball(s, 2);
        assert!(shift(&cut, Radius::integer(1), &[(3, 4)], Parity::Odd).is_err());
        assert!(shift(&cut, Radius::integer(1), &[(2, 1)], Parity::Odd).is_ok());
    }

    #[test]
    fn shift_splits_at_later_endpoint() {
        // grid depth 4, S = first two layers; boundary 1, 2 joined by (1, 2)
        let s = Skeleton::new(&Pyramid::grid(4)).unwrap();
        let cut = MonotoneCut::ball(s, 2);
        let odd = shift(&cut, Radius::integer(1), &[(1, 2)], Parity::Odd).unwrap();
        assert!(odd.contains(3) && !odd.contains(4));
        let even = shift(&cut, Radius::integer(1), &[(1, 2)], Parity::Even).unwrap();
        assert!(!even.contains(3) && even.contains(4));
    }

    #[test]
    fn unit_rate_takes_every_candidate_at_radius_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = Skeleton::new(&Pyramid::grid(5)).unwrap();
        let cut = MonotoneCut::ball(s, 3);
        let (_, choice) = evolve(&cut, Radius::integer(1), EdgeRate::Unit, &mut rng);
        assert_eq!(choice.candidates, vec![(3, 4)]);
        assert_eq!(choice.chosen, choice.candidates);
    }

    #[test]
    fn evolution_keeps_cuts_monotone_and_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = Pyramid::random(9, 6, &mut rng);
        let s = Skeleton::new(&p).unwrap();
        for _ in 0..50 {
            let mut cut = random_monotone(&s, &mut rng);
            for r in [9u64, 3, 1] {
                let (next, _) = evolve(&cut, Radius::integer(r), EdgeRate::Unit, &mut rng);
                assert!(MonotoneCut::new(s.clone(), next.members().clone()).is_ok());
                assert!(cut.members().is_subset(next.members()));
                cut = next;
            }
        }
    }
}
