//! Funnel-to-pyramid reduction: ray widening, random partitions, peeling and
//! the glued embedding.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::cut::{one_sum_glue, CutMeasure, GluePart};
use crate::distortion::{DistortionAccumulator, EmbeddingReport};
use crate::embed::{embed_pyramid, sample_rng, EmbedOptions, ProcessConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::{apsp, FiniteMetric, Graph};
use crate::pyramid::{validate_funnel, validate_pyramid, Funnel, Pyramid};

/// A clustering of `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomPartition {
    pub cluster: Vec<usize>,
    /// Centre vertex of each cluster.
    pub centers: Vec<usize>,
    pub scale: f64,
    /// Carving radius drawn for this partition.
    pub radius: f64,
}

impl RandomPartition {
    pub fn clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn separates(&self, x: usize, y: usize) -> bool {
        self.cluster[x] != self.cluster[y]
    }
}

/// Ball carving of a metric: one radius uniform in `[scale/4, scale/2]`,
/// centres visited in index order, each unassigned centre takes every
/// unassigned point within the radius.
pub fn partition_metric<R: Rng>(m: &FiniteMetric, scale: f64, rng: &mut R) -> RandomPartition {
    let n = m.n();
    if n > 0 && scale >= m.diameter() {
        return RandomPartition { cluster: vec![0; n], centers: vec![0], scale, radius: scale };
    }
    let radius = rng.gen_range(scale / 4.0..=scale / 2.0);
    let mut cluster = vec![usize::MAX; n];
    let mut centers = Vec::new();
    for c in 0..n {
        if cluster[c] != usize::MAX {
            continue;
        }
        let id = centers.len();
        centers.push(c);
        for v in c..n {
            if cluster[v] == usize::MAX && m.get(c, v) <= radius {
                cluster[v] = id;
            }
        }
    }
    debug_assert!(cluster_diameters(m, &cluster, centers.len()).iter().all(|&d| d <= scale));
    RandomPartition { cluster, centers, scale, radius }
}

/// [`partition_metric`] on the shortest-path metric of `g`.
pub fn lipschitz_partition<R: Rng>(g: &Graph, scale: f64, rng: &mut R) -> Result<RandomPartition> {
    if !(scale > 0.0) {
        return Err(invalid("partition scale must be positive"));
    }
    Ok(partition_metric(&apsp(g)?, scale, rng))
}

pub fn cluster_diameters(m: &FiniteMetric, cluster: &[usize], count: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; count];
    for x in 0..m.n() {
        for y in x + 1..m.n() {
            if cluster[x] == cluster[y] {
                out[cluster[x]] = out[cluster[x]].max(m.get(x, y));
            }
        }
    }
    out
}

/// Empirical separation modulus: max over pairs at distance ≤ scale of
/// `Pr[separated] · scale / d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub scale: f64,
    pub trials: usize,
    pub beta: f64,
    pub worst_pair: (usize, usize),
    pub max_cluster_diameter: f64,
}

pub fn estimate_beta(m: &FiniteMetric, scale: f64, trials: usize, seed: u64) -> BetaEstimate {
    let n = m.n();
    let mut sep = vec![0u32; n * n];
    let mut max_diam = 0.0f64;
    for t in 0..trials {
        let p = partition_metric(m, scale, &mut sample_rng(seed, t as u64));
        max_diam = cluster_diameters(m, &p.cluster, p.clusters()).into_iter().fold(max_diam, f64::max);
        for x in 0..n {
            for y in x + 1..n {
                if p.separates(x, y) {
                    sep[x * n + y] += 1;
                }
            }
        }
    }
    let mut beta = 0.0;
    let mut worst = (0, 0);
    for x in 0..n {
        for y in x + 1..n {
            let d = m.get(x, y);
            if d > 0.0 && d <= scale {
                let b = sep[x * n + y] as f64 / trials as f64 * scale / d;
                if b > beta {
                    beta = b;
                    worst = (x, y);
                }
            }
        }
    }
    BetaEstimate { scale, trials, beta, worst_pair: worst, max_cluster_diameter: max_diam }
}

/// Which copy of the widened funnel a block is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BlockShape {
    /// The two central columns plus the basepoint.
    Peel,
    /// Both central columns removed.
    Open,
    /// Column 2 removed; column 1 kept.
    KeepLeft,
    /// Column 1 removed; column 2 kept.
    KeepRight,
}

/// The widened funnel around one ray.
#[derive(Debug, Clone)]
pub struct RaySurgery {
    pub funnel: Funnel,
    /// Bottom-layer vertex whose ancestor path is the ray.
    pub bottom: usize,
    /// Funnel ids of the ray, top to bottom (basepoint first).
    pub ray: Vec<usize>,
    pub widened: Funnel,
    /// Funnel vertex to widened vertex; ray vertices go to column 1.
    pub image: Vec<usize>,
    /// Grid vertices per row (funnel layers 1.. in order), columns 0..4.
    pub grid: Vec<[usize; 4]>,
    /// Basepoint and the two central columns, sorted.
    pub peel_set: Vec<usize>,
    pub metric: FiniteMetric,
    /// Max ratio of induced to ambient distance over the peel set.
    pub dilation: f64,
    /// Distortion of the funnel inside the widened graph.
    pub widening: EmbeddingReport,
}

impl RaySurgery {
    pub fn in_peel_set(&self, v: usize) -> bool {
        self.peel_set.binary_search(&v).is_ok()
    }

    /// The block shape a vertex of the peel set attaches.
    pub fn shape_for(&self, a: usize) -> BlockShape {
        if a == self.widened.basepoint() {
            BlockShape::Open
        } else if self.grid.iter().any(|row| row[1] == a) {
            BlockShape::KeepLeft
        } else {
            BlockShape::KeepRight
        }
    }

    /// Layers and parents of one block, in widened ids.
    fn block_layers(&self, shape: BlockShape) -> (Vec<Vec<usize>>, BTreeMap<usize, usize>) {
        let root = self.widened.basepoint();
        let mut layers = vec![vec![root]];
        for (i, layer) in self.widened.layers.iter().enumerate().skip(1) {
            let row = self.grid[i - 1];
            let rest = &layer[4..];
            let path: Vec<usize> = match shape {
                BlockShape::Peel => vec![row[1], row[2]],
                BlockShape::Open => [&[row[3]][..], rest, &[row[0]]].concat(),
                BlockShape::KeepLeft => [&[row[3]][..], rest, &[row[0], row[1]]].concat(),
                BlockShape::KeepRight => [&[row[2], row[3]][..], rest, &[row[0]]].concat(),
            };
            layers.push(path);
        }
        let parent = layers.iter().skip(1).flatten().map(|&v| (v, self.widened.parent[&v])).collect();
        (layers, parent)
    }

    /// The block as a pyramid on local ids `0..`, with local → widened ids.
    pub fn block(&self, shape: BlockShape) -> Result<(Pyramid, Vec<usize>)> {
        let (layers, parent) = self.block_layers(shape);
        let global: Vec<usize> = layers.iter().flatten().copied().collect();
        let mut local = HashMap::with_capacity(global.len());
        for (i, &g) in global.iter().enumerate() {
            local.insert(g, i);
        }
        let mut next = 0;
        let layers: Vec<Vec<usize>> = layers
            .iter()
            .map(|l| {
                l.iter()
                    .map(|_| {
                        next += 1;
                        next - 1
                    })
                    .collect()
            })
            .collect();
        let parent = parent.iter().map(|(c, p)| (local[c], local[p])).collect();
        let p = Pyramid { layers, parent };
        if let Some(v) = validate_pyramid(&p).first() {
            return Err(Error::Structure(format!("{shape:?} block violates condition {}: {}", v.condition, v.detail)));
        }
        Ok((p, global))
    }
}

/// Widens the ray ending at bottom vertex number `ray` (uniform when `None`)
/// into a four-column grid.
pub fn ray_surgery<R: Rng>(f: &Funnel, ray: Option<usize>, rng: &mut R) -> Result<RaySurgery> {
    if let Some(v) = validate_funnel(f).first() {
        return Err(Error::Structure(format!("funnel violates condition {}: {}", v.condition, v.detail)));
    }
    let bottom_layer = f.layers.last().unwrap();
    let k = match ray {
        Some(k) if k < bottom_layer.len() => k,
        Some(k) => return Err(invalid(format!("ray {k} outside bottom layer of {}", bottom_layer.len()))),
        None => rng.gen_range(0..bottom_layer.len()),
    };
    let bottom = bottom_layer[k];
    let depth = f.depth();
    let mut path = vec![bottom];
    while let Some(&p) = f.parent.get(path.last().unwrap()) {
        path.push(p);
    }
    path.reverse();
    let n = f.n();
    let mut image = vec![usize::MAX; n];
    let mut layers = vec![vec![0usize]];
    image[f.basepoint()] = 0;
    let mut next = 1;
    let mut grid = Vec::with_capacity(depth.saturating_sub(1));
    // rotate each layer to start just after the ray vertex
    let mut rotated: Vec<Vec<usize>> = Vec::with_capacity(depth);
    for (i, layer) in f.layers.iter().enumerate().skip(1) {
        let p = layer.iter().position(|&v| v == path[i]).expect("ray vertex in its layer");
        let rest: Vec<usize> = (1..layer.len()).map(|j| layer[(p + j) % layer.len()]).collect();
        let row = [next, next + 1, next + 2, next + 3];
        next += 4;
        image[path[i]] = row[1];
        let mut out = row.to_vec();
        for &v in &rest {
            image[v] = next;
            out.push(next);
            next += 1;
        }
        grid.push(row);
        layers.push(out);
        rotated.push(rest);
    }
    let mut parent = BTreeMap::new();
    for i in 1..depth {
        let row = grid[i - 1];
        let rest = &rotated[i - 1];
        if i == 1 {
            for &v in &layers[1] {
                parent.insert(v, 0);
            }
            continue;
        }
        let up = grid[i - 2];
        for c in 0..4 {
            parent.insert(row[c], up[c]);
        }
        let ray_parent = path[i - 1];
        // children of the ray parent other than the ray child: the run
        // right after the ray vertex goes to column 3, the run before it to 0
        let after = rest.iter().take_while(|&&v| f.parent[&v] == ray_parent).count();
        let before = rest[after..].iter().rev().take_while(|&&v| f.parent[&v] == ray_parent).count();
        for (j, &v) in rest.iter().enumerate() {
            let fp = f.parent[&v];
            let gp = if fp != ray_parent {
                image[fp]
            } else if j < after {
                up[3]
            } else {
                debug_assert!(j >= rest.len() - before);
                up[0]
            };
            parent.insert(image[v], gp);
        }
    }
    let widened = Funnel { layers, parent, cyclic: true };
    if let Some(v) = validate_funnel(&widened).first() {
        return Err(Error::Structure(format!("widened funnel violates condition {}: {}", v.condition, v.detail)));
    }
    let metric = apsp(&widened.to_graph()?)?;
    let mut peel_set: Vec<usize> = std::iter::once(0).chain(grid.iter().flat_map(|r| [r[1], r[2]])).collect();
    peel_set.sort_unstable();
    let induced = apsp(&widened.to_graph()?.induced(&peel_set)?)?;
    let mut dilation = 1.0f64;
    for i in 0..peel_set.len() {
        for j in i + 1..peel_set.len() {
            dilation = dilation.max(induced.get(i, j) / metric.get(peel_set[i], peel_set[j]));
        }
    }
    let fm = apsp(&f.to_graph()?)?;
    let mut acc = DistortionAccumulator::new();
    for x in 0..n {
        for y in x + 1..n {
            acc.add(x, y, fm.get(x, y), metric.get(image[x], image[y]));
        }
    }
    Ok(RaySurgery {
        funnel: f.clone(),
        bottom,
        ray: path,
        widened,
        image,
        grid,
        peel_set,
        metric,
        dilation,
        widening: acc.finish(),
    })
}

/// How a cluster picks its attachment vertex in the peel set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Attachment {
    /// Peel-set vertex nearest the cluster centre (lowest id on ties).
    #[default]
    NearestToCenter,
    Uniform,
}

/// One copy of a block glued at `attach`, serving the cluster `members`.
#[derive(Debug, Clone, Serialize)]
pub struct BlockCopy {
    pub shape: BlockShape,
    /// Widened id of the shared vertex (for the peel block, the basepoint).
    pub attach: usize,
    /// Widened ids outside the peel set routed through this copy.
    pub members: Vec<usize>,
}

/// One draw of the peeling distribution.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionSample {
    pub bottom: usize,
    pub partition_scale: f64,
    pub partition_radius: f64,
    /// Copy 0 is the peel block; the others hang off it.
    pub copies: Vec<BlockCopy>,
}

/// Peels a widened funnel: partitions the vertices outside the peel set at
/// half the diameter of the cut-open graph and hangs one block copy per
/// cluster off the peel block.
pub fn peel<R: Rng>(s: &RaySurgery, attachment: Attachment, rng: &mut R) -> Result<ReductionSample> {
    let outside: Vec<usize> = (0..s.widened.n()).filter(|&v| !s.in_peel_set(v)).collect();
    let mut copies = vec![BlockCopy { shape: BlockShape::Peel, attach: s.widened.basepoint(), members: vec![] }];
    if outside.is_empty() {
        return Ok(ReductionSample { bottom: s.bottom, partition_scale: 0.0, partition_radius: 0.0, copies });
    }
    let (open, open_ids) = s.block(BlockShape::Open)?;
    let open_metric = apsp(&open.to_graph()?)?;
    let local: Vec<usize> = {
        let mut inv = vec![usize::MAX; s.widened.n()];
        for (l, &g) in open_ids.iter().enumerate() {
            inv[g] = l;
        }
        outside.iter().map(|&v| inv[v]).collect()
    };
    let restricted = open_metric.restrict(&local);
    let scale = restricted.diameter() / 2.0;
    let part = if scale > 0.0 {
        partition_metric(&restricted, scale, rng)
    } else {
        RandomPartition { cluster: vec![0; outside.len()], centers: vec![0], scale, radius: 0.0 }
    };
    for (c, &center) in part.centers.iter().enumerate() {
        let a = match attachment {
            Attachment::NearestToCenter => {
                let cv = outside[center];
                *s.peel_set
                    .iter()
                    .min_by(|&&a, &&b| s.metric.get(cv, a).total_cmp(&s.metric.get(cv, b)).then(a.cmp(&b)))
                    .unwrap()
            }
            Attachment::Uniform => *s.peel_set.choose(rng).unwrap(),
        };
        let members = (0..outside.len()).filter(|&i| part.cluster[i] == c).map(|i| outside[i]).collect();
        copies.push(BlockCopy { shape: s.shape_for(a), attach: a, members });
    }
    Ok(ReductionSample { bottom: s.bottom, partition_scale: scale, partition_radius: part.radius, copies })
}

/// Blocks of one surgery, built once.
struct Blocks {
    shapes: BTreeMap<BlockShape, (Pyramid, Vec<usize>, FiniteMetric)>,
}

impl Blocks {
    fn new(s: &RaySurgery) -> Result<Self> {
        let mut shapes = BTreeMap::new();
        let all = [BlockShape::Peel, BlockShape::Open, BlockShape::KeepLeft, BlockShape::KeepRight];
        let has_rows = !s.grid.is_empty();
        for shape in all {
            if shape != BlockShape::Peel && !has_rows {
                continue;
            }
            let (p, ids) = s.block(shape)?;
            let m = apsp(&p.to_graph()?)?;
            shapes.insert(shape, (p, ids, m));
        }
        Ok(Blocks { shapes })
    }

    fn local_of(&self, shape: BlockShape, g: usize) -> usize {
        self.shapes[&shape].1.iter().position(|&x| x == g).expect("vertex in block")
    }
}

/// Where each widened vertex lives in a sample: (copy index, local id).
fn placement(s: &RaySurgery, blocks: &Blocks, sample: &ReductionSample) -> Vec<(usize, usize)> {
    let n = s.widened.n();
    let mut out = vec![(usize::MAX, 0); n];
    let peel_ids = &blocks.shapes[&BlockShape::Peel].1;
    for (l, &g) in peel_ids.iter().enumerate() {
        out[g] = (0, l);
    }
    for (c, copy) in sample.copies.iter().enumerate().skip(1) {
        let ids = &blocks.shapes[&copy.shape].1;
        let mut inv = HashMap::with_capacity(ids.len());
        for (l, &g) in ids.iter().enumerate() {
            inv.insert(g, l);
        }
        for &m in &copy.members {
            out[m] = (c, inv[&m]);
        }
    }
    out
}

/// Shortest-path distances of the glued graph between widened vertices.
pub fn glued_distances(s: &RaySurgery, sample: &ReductionSample) -> Result<FiniteMetric> {
    let blocks = Blocks::new(s)?;
    Ok(glued_metric(s, &blocks, sample))
}

fn glued_metric(s: &RaySurgery, blocks: &Blocks, sample: &ReductionSample) -> FiniteMetric {
    let n = s.widened.n();
    let place = placement(s, blocks, sample);
    let peel = &blocks.shapes[&BlockShape::Peel];
    let attach_local: Vec<(usize, usize)> = sample
        .copies
        .iter()
        .map(|c| (blocks.local_of(c.shape, c.attach), blocks.local_of(BlockShape::Peel, c.attach)))
        .collect();
    // distance from a placed vertex to its copy's attachment, and the
    // attachment's id inside the peel block
    let to_hub = |(c, l): (usize, usize)| -> (f64, usize) {
        if c == 0 {
            (0.0, l)
        } else {
            let m = &blocks.shapes[&sample.copies[c].shape].2;
            (m.get(l, attach_local[c].0), attach_local[c].1)
        }
    };
    let mut d = vec![0.0; n * n];
    for x in 0..n {
        for y in x + 1..n {
            let (px, py) = (place[x], place[y]);
            let v = if px.0 == py.0 {
                let m = if px.0 == 0 { &peel.2 } else { &blocks.shapes[&sample.copies[px.0].shape].2 };
                m.get(px.1, py.1)
            } else {
                let (dx, hx) = to_hub(px);
                let (dy, hy) = to_hub(py);
                dx + peel.2.get(hx, hy) + dy
            };
            d[x * n + y] = v;
            d[y * n + x] = v;
        }
    }
    FiniteMetric::new(n, d).expect("glued distances form a metric")
}

/// Options for [`embed_funnel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelEmbedOptions {
    pub peel_samples: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub config: ProcessConfig,
    pub attachment: Attachment,
}

impl Default for FunnelEmbedOptions {
    fn default() -> Self {
        FunnelEmbedOptions {
            peel_samples: 100,
            mc_samples: 10_000,
            seed: 0,
            config: ProcessConfig::default(),
            attachment: Attachment::default(),
        }
    }
}

/// Per-sample checks gathered while embedding a funnel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeelStats {
    pub samples: usize,
    /// Every sample's glued graph dominated the funnel metric.
    pub non_contracting: bool,
    /// Worst pair ratio of mean glued distance to funnel distance.
    pub mean_inflation: f64,
    pub max_widening: f64,
    pub max_dilation: f64,
    pub blocks_checked: usize,
}

#[derive(Debug, Clone)]
pub struct FunnelEmbedding {
    pub measure: CutMeasure,
    pub report: EmbeddingReport,
    pub stats: PeelStats,
}

const PEEL_STREAM: u64 = 0x7065_656c;

/// Embeds a funnel by averaging, over peel samples, the glue of the block
/// embeddings pulled back to the funnel's vertices.
pub fn embed_funnel(f: &Funnel, opts: FunnelEmbedOptions) -> Result<FunnelEmbedding> {
    if opts.peel_samples == 0 || opts.mc_samples == 0 {
        return Err(invalid("need at least one peel sample and one Monte Carlo sample"));
    }
    if let Some(v) = validate_funnel(f).first() {
        return Err(Error::Structure(format!("funnel violates condition {}: {}", v.condition, v.detail)));
    }
    let n = f.n();
    let fm = apsp(&f.to_graph()?)?;
    let mut stats = PeelStats {
        samples: opts.peel_samples,
        non_contracting: true,
        mean_inflation: 1.0,
        max_widening: 1.0,
        max_dilation: 1.0,
        blocks_checked: 0,
    };
    if n == 1 {
        return Ok(FunnelEmbedding { measure: CutMeasure::new(1), report: DistortionAccumulator::new().finish(), stats });
    }
    let mut surgeries: HashMap<usize, (RaySurgery, Blocks)> = HashMap::new();
    let mut block_measures: HashMap<(usize, BlockShape), Arc<CutMeasure>> = HashMap::new();
    let mut total = CutMeasure::new(n);
    let mut glued_sum = vec![0.0; n * n];
    let weight = 1.0 / opts.peel_samples as f64;
    for k in 0..opts.peel_samples {
        let mut rng = sample_rng(opts.seed ^ PEEL_STREAM, k as u64);
        let bottom = rng.gen_range(0..f.layers.last().unwrap().len());
        if !surgeries.contains_key(&bottom) {
            let s = ray_surgery(f, Some(bottom), &mut rng)?;
            let blocks = Blocks::new(&s)?;
            stats.max_widening = stats.max_widening.max(s.widening.distortion);
            stats.max_dilation = stats.max_dilation.max(s.dilation);
            stats.blocks_checked += blocks.shapes.len();
            surgeries.insert(bottom, (s, blocks));
        }
        let (s, blocks) = &surgeries[&bottom];
        let sample = peel(s, opts.attachment, &mut rng)?;
        // non-contraction of this sample
        let gm = glued_metric(s, blocks, &sample);
        for x in 0..n {
            for y in x + 1..n {
                let g = gm.get(s.image[x], s.image[y]);
                if g + 1e-9 < fm.get(x, y) {
                    stats.non_contracting = false;
                }
                glued_sum[x * n + y] += g * weight;
            }
        }
        // glue block measures over this sample's copies
        let mut parts = Vec::with_capacity(sample.copies.len());
        let mut offset = 0;
        let mut global_of_copy = Vec::with_capacity(sample.copies.len());
        let peel_len = blocks.shapes[&BlockShape::Peel].1.len();
        for (c, copy) in sample.copies.iter().enumerate() {
            let key = (bottom, copy.shape);
            if !block_measures.contains_key(&key) {
                let (p, _, _) = &blocks.shapes[&copy.shape];
                let seed = sample_rng(opts.seed, (1 << 40) | (bottom as u64) << 2 | copy.shape as u64).gen();
                let e = embed_pyramid(p, EmbedOptions { samples: opts.mc_samples, seed, config: opts.config })?;
                block_measures.insert(key, Arc::new(e.measure));
            }
            let measure = (*block_measures[&key]).clone();
            let size = measure.n();
            let global: Vec<usize> = if c == 0 {
                (0..size).collect()
            } else {
                let attach = blocks.local_of(copy.shape, copy.attach);
                let hub = blocks.local_of(BlockShape::Peel, copy.attach);
                let base = peel_len + offset;
                offset += size - 1;
                (0..size).map(|l| match l.cmp(&attach) {
                    std::cmp::Ordering::Less => base + l,
                    std::cmp::Ordering::Equal => hub,
                    std::cmp::Ordering::Greater => base + l - 1,
                })
                .collect()
            };
            global_of_copy.push(global.clone());
            parts.push(GluePart { measure, global });
        }
        let glued = one_sum_glue(&parts, peel_len + offset)?;
        let place = placement(s, blocks, &sample);
        let map: Vec<usize> = (0..n)
            .map(|x| {
                let (c, l) = place[s.image[x]];
                global_of_copy[c][l]
            })
            .collect();
        let mut pulled = glued.pullback(&map);
        pulled.scale(weight);
        total.extend(&pulled);
        total.compact();
    }
    let inflation = {
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                worst = worst.max(glued_sum[x * n + y] / fm.get(x, y));
            }
        }
        worst
    };
    stats.mean_inflation = inflation;
    let dm = total.distance_matrix();
    let report = crate::distortion::distortion(&fm, &dm)?;
    Ok(FunnelEmbedding { measure: total, report, stats })
}
