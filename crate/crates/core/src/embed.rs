//! The random-cut embedding of a pyramid: extension, the evolution chain,
//! Monte Carlo and exact estimates, and the resulting cut measure.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::VertexSet;
use crate::cut::CutMeasure;
use crate::distortion::{DistortionAccumulator, EmbeddingReport};
use crate::error::{invalid, Error, Result};
use crate::graph::apsp;
use crate::pyramid::{Frontier, MonotoneCut, Pyramid, Skeleton, StepChoice};
use crate::radius::{EdgeRate, Radius};

/// Random stream for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// How the evolution radii shrink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `depth / 3^i` for `i < ceil(log2 depth)`.
    Geometric,
    /// Start at `depth`, then `ceil(r / 3)` down to and including 1.
    Integral,
}

impl Schedule {
    pub fn radii(&self, depth: usize) -> Vec<Radius> {
        let depth = depth.max(1) as u64;
        match self {
            Schedule::Geometric => {
                let steps = u64::BITS - (depth - 1).leading_zeros();
                (0..steps).map(|i| Radius::new(depth, 3u64.pow(i))).collect()
            }
            Schedule::Integral => {
                let mut out = vec![Radius::integer(depth)];
                let mut r = depth;
                while r > 1 {
                    r = r.div_ceil(3);
                    out.push(Radius::integer(r));
                }
                out
            }
        }
    }
}

/// Knobs of the evolution process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub schedule: Schedule,
    pub rate: EdgeRate,
    /// How many times every edge is halved before the process runs.
    pub subdivisions: u8,
}

impl ProcessConfig {
    /// The process exactly as defined: geometric radii, rate `min(1, 1/r)`,
    /// no subdivision.
    pub fn literal() -> Self {
        ProcessConfig { schedule: Schedule::Geometric, rate: EdgeRate::Unit, subdivisions: 0 }
    }

    /// Subdivided pyramid, integral radii ending at 1, rate `min(1/2, 1/r)`.
    pub fn repaired() -> Self {
        ProcessConfig { schedule: Schedule::Integral, rate: EdgeRate::Half, subdivisions: 1 }
    }
}

impl Default for ProcessConfig {
    fn default() -> Self {
        Self::repaired()
    }
}

/// A pyramid hung below a path of twice its depth.
#[derive(Debug, Clone)]
pub struct ExtendedPyramid {
    /// Skeleton of the extended pyramid.
    pub skeleton: Arc<Skeleton>,
    /// Depth of the pyramid that was extended.
    pub base_depth: usize,
    /// Id in the extended pyramid of every vertex of the extended pyramid's source.
    pub injection: Vec<usize>,
    /// The new basepoint.
    pub apex: usize,
}

impl ExtendedPyramid {
    /// Depth of the extended pyramid, three times the base depth.
    pub fn depth(&self) -> usize {
        self.skeleton.height()
    }
}

/// Adds a path of `2 * depth` new vertices above the basepoint. Original ids
/// are kept; the new apex gets id `n`.
pub fn extend(p: &Pyramid) -> Result<ExtendedPyramid> {
    Skeleton::new(p)?;
    let n = p.n();
    let depth = p.depth();
    let mut layers: Vec<Vec<usize>> = (0..2 * depth).map(|k| vec![n + k]).collect();
    let mut parent = p.parent.clone();
    for k in 1..2 * depth {
        parent.insert(n + k, n + k - 1);
    }
    parent.insert(p.basepoint(), n + 2 * depth - 1);
    layers.extend(p.layers.iter().cloned());
    let skeleton = Skeleton::new(&Pyramid { layers, parent })?;
    Ok(ExtendedPyramid { skeleton, base_depth: depth, injection: (0..n).collect(), apex: n })
}

/// The pyramid the process runs on, and where the input vertices land.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub extended: ExtendedPyramid,
    /// Extended-pyramid id of each input vertex.
    pub image: Vec<usize>,
    pub radii: Vec<Radius>,
    pub config: ProcessConfig,
}

impl Prepared {
    pub fn new(p: &Pyramid, config: ProcessConfig) -> Result<Prepared> {
        let mut base = p.clone();
        let mut image: Vec<usize> = (0..p.n()).collect();
        for _ in 0..config.subdivisions {
            let (finer, inner) = base.subdivide()?;
            image = image.iter().map(|&v| inner[v]).collect();
            base = finer;
        }
        let extended = extend(&base)?;
        let image = image.iter().map(|&v| extended.injection[v]).collect();
        let radii = config.schedule.radii(extended.base_depth);
        Ok(Prepared { extended, image, radii, config })
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.extended.skeleton
    }

    /// Depth of the extended pyramid.
    pub fn depth(&self) -> usize {
        self.extended.depth()
    }

    /// Weight of one unit of separation probability: the extended depth,
    /// divided by the subdivision scale so that distances track the input.
    pub fn scale(&self) -> f64 {
        self.depth() as f64 / (1u64 << self.config.subdivisions) as f64
    }

    fn rates(&self) -> Vec<f64> {
        self.radii.iter().map(|&r| self.config.rate.probability_f64(r)).collect()
    }

    /// Exact `f_0` separation: layer gap over the extended depth.
    pub fn f0(&self, x: usize, y: usize) -> f64 {
        let s = self.skeleton();
        let (a, b) = (s.depth(self.image[x]), s.depth(self.image[y]));
        a.abs_diff(b) as f64 / self.depth() as f64
    }

    /// Runs one chain and returns its terminal frontier.
    pub fn run<R: Rng>(&self, rng: &mut R, rates: &[f64], scratch: &mut crate::pyramid::StepScratch) -> Frontier {
        let s = self.skeleton();
        let j = rng.gen_range(1..=self.depth());
        let mut f = Frontier::layer(s, j);
        for (r, &p) in self.radii.iter().zip(rates) {
            f = f.step(s, *r, p, rng, scratch);
        }
        f
    }
}

/// One realised chain `S_0 ⊆ S_1 ⊆ …` with its random choices.
#[derive(Debug, Clone)]
pub struct CutChain {
    /// `S_0` is the union of the first `initial_layer` layers.
    pub initial_layer: usize,
    pub cuts: Vec<MonotoneCut>,
    pub steps: Vec<StepChoice>,
}

/// Samples one chain with the reference (set-based) evolution.
pub fn sample_chain<R: Rng>(prep: &Prepared, rng: &mut R) -> CutChain {
    let s = prep.skeleton().clone();
    let j = rng.gen_range(1..=prep.depth());
    let mut cuts = vec![MonotoneCut::ball(s, j)];
    let mut steps = Vec::new();
    for &r in &prep.radii {
        let (next, choice) = crate::pyramid::evolve(cuts.last().unwrap(), r, prep.config.rate, rng);
        cuts.push(next);
        steps.push(choice);
    }
    CutChain { initial_layer: j, cuts, steps }
}

/// Per-pair estimate. Probabilities are of separation; `g_hat = f_hat + f0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEstimate {
    pub x: usize,
    pub y: usize,
    pub d_graph: f64,
    pub f_hat: f64,
    pub f0: f64,
    pub g_hat: f64,
    pub stderr: f64,
}

/// Terminal-cut membership of the tracked vertices, packed 64 samples per word.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    pub samples: usize,
    words: usize,
    /// `rows[v * words + w]`: bit `b` says tracked vertex `v` is inside in sample `64 w + b`.
    rows: Vec<u64>,
    tracked: usize,
}

impl SampleMatrix {
    pub fn separations(&self, a: usize, b: usize) -> u64 {
        let ra = &self.rows[a * self.words..(a + 1) * self.words];
        let rb = &self.rows[b * self.words..(b + 1) * self.words];
        ra.iter().zip(rb).map(|(p, q)| (p ^ q).count_ones() as u64).sum()
    }

    /// Membership set of sample `s` over the tracked vertices.
    pub fn sample_set(&self, s: usize) -> VertexSet {
        let (w, b) = (s / 64, s % 64);
        VertexSet::from_iter(self.tracked, (0..self.tracked).filter(|&v| self.rows[v * self.words + w] >> b & 1 == 1))
    }
}

/// Runs `samples` chains and records the terminal membership of the listed
/// input vertices (indices into `prep.image`).
pub fn sample_terminal(prep: &Prepared, tracked: &[usize], samples: usize, seed: u64) -> SampleMatrix {
    let s = prep.skeleton();
    let rates = prep.rates();
    let idx: Vec<u32> = tracked.iter().map(|&v| s.idx_of[prep.image[v]]).collect();
    let words = samples.div_ceil(64);
    let columns: Vec<Vec<u64>> = (0..words)
        .into_par_iter()
        .map(|w| {
            let mut scratch = crate::pyramid::StepScratch::default();
            let mut col = vec![0u64; idx.len()];
            for b in 0..64.min(samples - 64 * w) {
                let mut rng = sample_rng(seed, (64 * w + b) as u64);
                let f = prep.run(&mut rng, &rates, &mut scratch);
                for (k, &x) in idx.iter().enumerate() {
                    if f.contains_idx(s, x) {
                        col[k] |= 1 << b;
                    }
                }
            }
            col
        })
        .collect();
    let mut rows = vec![0u64; idx.len() * words];
    for (w, col) in columns.iter().enumerate() {
        for (k, &bits) in col.iter().enumerate() {
            rows[k * words + w] = bits;
        }
    }
    SampleMatrix { samples, words, rows, tracked: idx.len() }
}

/// Monte Carlo estimates for the given pairs of input vertices.
pub fn estimate(p: &Pyramid, pairs: &[(usize, usize)], samples: usize, seed: u64, config: ProcessConfig) -> Result<Vec<PairEstimate>> {
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let prep = Prepared::new(p, config)?;
    let n = p.n();
    if pairs.iter().any(|&(x, y)| x >= n || y >= n) {
        return Err(invalid("pair vertex outside the pyramid"));
    }
    let mut tracked: Vec<usize> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    tracked.sort_unstable();
    tracked.dedup();
    let slot: BTreeMap<usize, usize> = tracked.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let m = sample_terminal(&prep, &tracked, samples, seed);
    let g = p.to_graph()?;
    Ok(pairs
        .iter()
        .map(|&(x, y)| {
            let sep = m.separations(slot[&x], slot[&y]);
            let f_hat = sep as f64 / samples as f64;
            let f0 = prep.f0(x, y);
            let d_graph = g.distances_from(x)[y];
            let stderr = (f_hat * (1.0 - f_hat) / samples as f64).sqrt();
            PairEstimate { x, y, d_graph, f_hat, f0, g_hat: f_hat + f0, stderr }
        })
        .collect())
}

/// Exact step-by-step distributions `μ_0, …, μ_δ` as frontiers with
/// rational probabilities.
#[derive(Debug, Clone)]
pub struct ExactProcess {
    pub prep: Prepared,
    pub steps: Vec<Vec<(Frontier, BigRational)>>,
}

/// Default cap on enumerated branches per step.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

/// Enumerates the process exactly. Fails with [`Error::Budget`] when a step
/// would expand more than `budget` branches.
pub fn exact_distribution(p: &Pyramid, config: ProcessConfig, budget: u64) -> Result<ExactProcess> {
    let prep = Prepared::new(p, config)?;
    let s = prep.skeleton().clone();
    let depth = prep.depth();
    let uniform = BigRational::new(BigInt::one(), BigInt::from(depth));
    let mut current: BTreeMap<Frontier, BigRational> =
        (1..=depth).map(|j| (Frontier::layer(&s, j), uniform.clone())).collect();
    let mut steps = vec![current.clone().into_iter().collect::<Vec<_>>()];
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut cand = Vec::new();
    for &r in &prep.radii {
        if r.floor() == 0 {
            steps.push(steps.last().unwrap().clone());
            continue;
        }
        let p_edge = prep.config.rate.probability(r);
        let q_edge = BigRational::one() - &p_edge;
        let mut needed = 0f64;
        for f in current.keys() {
            f.candidates(&s, r, &mut cand);
            needed += 2f64.powi(cand.len() as i32 + 1);
        }
        if needed > budget as f64 {
            return Err(Error::Budget { needed, budget });
        }
        let mut next: BTreeMap<Frontier, BigRational> = BTreeMap::new();
        for (f, mass) in &current {
            f.candidates(&s, r, &mut cand);
            let k = cand.len();
            let mut cut_after = vec![false; f.len()];
            for mask in 0u64..(1 << k) {
                let chosen = mask.count_ones() as i32;
                let mut w = mass * &half;
                if !p_edge.is_one() || chosen != k as i32 {
                    w *= pow(&p_edge, chosen) * pow(&q_edge, k as i32 - chosen);
                }
                if w.is_zero() {
                    continue;
                }
                cut_after.iter_mut().for_each(|c| *c = false);
                for (i, &pos) in cand.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        cut_after[pos] = true;
                    }
                }
                for parity in [crate::pyramid::Parity::Odd, crate::pyramid::Parity::Even] {
                    let g = f.apply(&s, r, &cut_after, parity);
                    *next.entry(g).or_insert_with(BigRational::zero) += &w;
                }
            }
        }
        current = next;
        steps.push(current.clone().into_iter().collect());
    }
    Ok(ExactProcess { prep, steps })
}

fn pow(x: &BigRational, k: i32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..k {
        out *= x;
    }
    out
}

impl ExactProcess {
    /// Probability that the input vertices `x` and `y` are separated by `S_i`.
    pub fn separation(&self, i: usize, x: usize, y: usize) -> BigRational {
        let s = self.prep.skeleton();
        let (a, b) = (self.prep.image[x], self.prep.image[y]);
        self.steps[i]
            .iter()
            .filter(|(f, _)| f.contains(s, a) != f.contains(s, b))
            .fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    /// Probability that extended-pyramid vertex `v` is a boundary vertex of `S_i`.
    pub fn boundary_probability(&self, i: usize, v: usize) -> BigRational {
        let s = self.prep.skeleton();
        self.steps[i].iter().filter(|(f, _)| f.on_boundary(s, v)).fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    pub fn total_mass(&self, i: usize) -> BigRational {
        self.steps[i].iter().fold(BigRational::zero(), |acc, (_, w)| acc + w)
    }

    /// Exact `f_0` separation as a rational.
    pub fn f0(&self, x: usize, y: usize) -> BigRational {
        let s = self.prep.skeleton();
        let gap = s.depth(self.prep.image[x]).abs_diff(s.depth(self.prep.image[y]));
        BigRational::new(BigInt::from(gap), BigInt::from(self.prep.depth()))
    }

    /// Steps and input vertices where the boundary probability differs from
    /// `1/depth`. Only vertices strictly above the bottom of the extended
    /// pyramid are checked.
    pub fn uniform_law_violations(&self, n: usize) -> Vec<(usize, usize, BigRational)> {
        let s = self.prep.skeleton();
        let expect = BigRational::new(BigInt::one(), BigInt::from(self.prep.depth()));
        let mut out = Vec::new();
        for i in 0..self.steps.len() {
            for v in 0..n {
                let e = self.prep.image[v];
                if s.depth(e) >= self.prep.depth() {
                    continue;
                }
                let q = self.boundary_probability(i, e);
                if q != expect {
                    out.push((i, v, q));
                }
            }
        }
        out
    }

    /// Same-ray input pairs whose terminal separation is not the layer gap
    /// over the extended depth.
    pub fn vertical_violations(&self, n: usize) -> Vec<(usize, usize)> {
        let s = self.prep.skeleton();
        let last = self.steps.len() - 1;
        let mut out = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                let (a, b) = (self.prep.image[x], self.prep.image[y]);
                if (s.is_ancestor(a, b) || s.is_ancestor(b, a)) && self.separation(last, x, y) != self.f0(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Terminal distribution as a cut measure on the input vertices, weighted
    /// like [`embed_pyramid`], plus the ball cuts.
    pub fn measure(&self, n: usize) -> CutMeasure {
        let s = self.prep.skeleton();
        let scale = self.prep.scale();
        let mut mu = CutMeasure::new(n);
        for (f, w) in self.steps.last().unwrap() {
            let side = VertexSet::from_iter(n, (0..n).filter(|&v| f.contains(s, self.prep.image[v])));
            mu.push(side, scale * w.to_f64().unwrap_or(0.0));
        }
        add_ball_cuts(&self.prep, &mut mu);
        mu.compact();
        mu
    }
}

fn add_ball_cuts(prep: &Prepared, mu: &mut CutMeasure) {
    let s = prep.skeleton();
    let n = mu.n();
    let w = prep.scale() / prep.depth() as f64;
    for j in 1..=prep.depth() {
        let side = VertexSet::from_iter(n, (0..n).filter(|&v| s.depth(prep.image[v]) <= j));
        mu.push(side, w);
    }
}

/// Options for [`embed_pyramid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub samples: usize,
    pub seed: u64,
    pub config: ProcessConfig,
}

/// Result of embedding a pyramid.
#[derive(Debug, Clone)]
pub struct PyramidEmbedding {
    /// Cut measure on the pyramid's vertices; its distances are `scale · g`.
    pub measure: CutMeasure,
    pub report: EmbeddingReport,
    pub pairs: Vec<PairEstimate>,
    /// Depth of the extended pyramid the process ran on.
    pub depth: usize,
    /// Embedded distance per unit of separation probability.
    pub scale: f64,
    pub samples: usize,
    pub seed: u64,
    pub vertical: VerticalCheck,
}

/// Ancestor pairs must match `f0` (they are separated exactly by layer gap).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerticalCheck {
    pub pairs: usize,
    pub max_z: f64,
    pub pass: bool,
}

/// Embeds `p` into L1 as a cut measure built from sampled terminal cuts
/// (weight `scale / N` each) and the ball cuts (weight `scale / depth` each).
pub fn embed_pyramid(p: &Pyramid, opts: EmbedOptions) -> Result<PyramidEmbedding> {
    if opts.samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let prep = Prepared::new(p, opts.config)?;
    let n = p.n();
    let all: Vec<usize> = (0..n).collect();
    let m = sample_terminal(&prep, &all, opts.samples, opts.seed);
    let scale = prep.scale();
    let nsamp = opts.samples as f64;
    let metric = apsp(&p.to_graph()?)?;
    let psk = Skeleton::new(p)?;
    let mut acc = DistortionAccumulator::new();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut vertical = VerticalCheck { pairs: 0, max_z: 0.0, pass: true };
    for x in 0..n {
        for y in x + 1..n {
            let f_hat = m.separations(x, y) as f64 / nsamp;
            let f0 = prep.f0(x, y);
            let d_graph = metric.get(x, y);
            let stderr = (f_hat * (1.0 - f_hat) / nsamp).sqrt();
            acc.add(x, y, d_graph, scale * (f_hat + f0));
            if psk.is_ancestor(x, y) || psk.is_ancestor(y, x) {
                let sd = (f0 * (1.0 - f0) / nsamp).sqrt();
                let z = if sd > 0.0 { (f_hat - f0).abs() / sd } else if f_hat == f0 { 0.0 } else { f64::INFINITY };
                vertical.pairs += 1;
                vertical.max_z = vertical.max_z.max(z);
            }
            pairs.push(PairEstimate { x, y, d_graph, f_hat, f0, g_hat: f_hat + f0, stderr });
        }
    }
    vertical.pass = vertical.max_z <= 4.0;
    let mut measure = CutMeasure::new(n);
    for s in 0..opts.samples {
        measure.push(m.sample_set(s), scale / nsamp);
    }
    add_ball_cuts(&prep, &mut measure);
    measure.compact();
    Ok(PyramidEmbedding {
        measure,
        report: acc.finish(),
        pairs,
        depth: prep.depth(),
        scale,
        samples: opts.samples,
        seed: opts.seed,
        vertical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        let geo = |d| Schedule::Geometric.radii(d).iter().map(|r| r.to_string()).collect::<Vec<_>>();
        assert!(geo(1).is_empty());
        assert_eq!(geo(9), vec!["9", "3", "1", "1/3"]);
        assert_eq!(geo(4), vec!["4", "4/3"]);
        let int = |d| Schedule::Integral.radii(d).iter().map(|r| r.floor()).collect::<Vec<_>>();
        assert_eq!(int(1), vec![1]);
        assert_eq!(int(17), vec![17, 6, 2, 1]);
        assert_eq!(int(27), vec![27, 9, 3, 1]);
    }

    #[test]
    fn extension_shape() {
        let e = extend(&Pyramid::grid(3)).unwrap();
        assert_eq!(e.depth(), 9);
        assert_eq!(e.apex, 5);
        assert_eq!(e.skeleton.depth(0), 7);
        assert_eq!(e.skeleton.depth(e.apex), 1);
        let single = extend(&Pyramid::single_ray(1)).unwrap();
        assert_eq!(single.depth(), 3);
    }

    #[test]
    fn chain_is_nested_and_monotone() {
        let p = Pyramid::grid(9);
        let prep = Prepared::new(&p, ProcessConfig::literal()).unwrap();
        let mut rng = sample_rng(1, 0);
        for _ in 0..200 {
            let chain = sample_chain(&prep, &mut rng);
            assert_eq!(chain.cuts.len(), 5);
            for w in chain.cuts.windows(2) {
                assert!(w[0].members().is_subset(w[1].members()));
                assert!(w[1].is_ray_prefix());
            }
        }
    }

    #[test]
    fn trivial_depth_one_chain() {
        let p = Pyramid::single_ray(1);
        let prep = Prepared::new(&p, ProcessConfig::literal()).unwrap();
        let chain = sample_chain(&prep, &mut sample_rng(0, 0));
        assert_eq!(chain.cuts.len(), 1);
    }

    #[test]
    fn exact_mass_is_one() {
        let ex = exact_distribution(&Pyramid::grid(3), ProcessConfig::literal(), DEFAULT_BUDGET).unwrap();
        for i in 0..ex.steps.len() {
            assert!(ex.total_mass(i).is_one());
        }
    }

    #[test]
    fn exact_laws_on_small_pyramids() {
        for p in [Pyramid::grid(3), Pyramid::single_ray(4), Pyramid::from_child_counts(&[vec![3], vec![1, 2, 1]])] {
            let ex = exact_distribution(&p, ProcessConfig::literal(), DEFAULT_BUDGET).unwrap();
            assert!(ex.uniform_law_violations(p.n()).is_empty());
            assert!(ex.vertical_violations(p.n()).is_empty());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = exact_distribution(&Pyramid::grid(4), ProcessConfig::literal(), 3);
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn sampler_matches_reference_chain() {
        let p = Pyramid::grid(5);
        let prep = Prepared::new(&p, ProcessConfig::repaired()).unwrap();
        let rates = prep.rates();
        let mut scratch = crate::pyramid::StepScratch::default();
        for i in 0..100 {
            let chain = sample_chain(&prep, &mut sample_rng(4, i));
            let f = prep.run(&mut sample_rng(4, i), &rates, &mut scratch);
            assert_eq!(&f.to_cut(prep.skeleton()), chain.cuts.last().unwrap());
        }
    }
}
