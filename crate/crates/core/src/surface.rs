//! Hyperbolic-plane point sets and their funnel graphs.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distortion::{DistortionAccumulator, EmbeddingReport};
use crate::error::{invalid, Result};
use crate::pyramid::{validate_funnel, Funnel};

/// Net spacing of the funnel construction, in units of the (scaled) metric.
pub const NET_SPACING: f64 = 0.125;

/// Point of the hyperbolic plane in polar coordinates about the basepoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub rho: f64,
    pub theta: f64,
}

impl HPoint {
    pub fn new(rho: f64, theta: f64) -> Self {
        HPoint { rho, theta: theta.rem_euclid(TAU) }
    }

    pub const ORIGIN: HPoint = HPoint { rho: 0.0, theta: 0.0 };
}

/// Shorter angular separation, in `[0, π]`.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance in the curvature −1 plane:
/// `sinh²(d/2) = sinh²((ρa−ρb)/2) + sinh ρa · sinh ρb · sin²(Δθ/2)`.
pub fn hdist(a: HPoint, b: HPoint) -> f64 {
    let radial = ((a.rho - b.rho) / 2.0).sinh();
    let s = (angle_gap(a.theta, b.theta) / 2.0).sin();
    let h = radial * radial + a.rho.sinh() * b.rho.sinh() * s * s;
    2.0 * h.sqrt().asinh()
}

/// `sin²` of the half angle at the vertex joining sides `p` and `q`
/// opposite side `o`.
fn half_angle_sin2(p: f64, q: f64, o: f64) -> f64 {
    if p <= 0.0 || q <= 0.0 {
        return 0.0;
    }
    let s = (p + q + o) / 2.0;
    let v = ((s - p).max(0.0)).sinh() * ((s - q).max(0.0)).sinh() / (p.sinh() * q.sinh());
    v.clamp(0.0, 1.0)
}

/// Distance between points at distances `u` and `v` along two geodesics
/// leaving a common vertex with half-angle sine squared `sin2`.
fn hinge(u: f64, v: f64, sin2: f64) -> f64 {
    let radial = ((u - v) / 2.0).sinh();
    let h = radial * radial + u.sinh() * v.sinh() * sin2;
    2.0 * h.sqrt().asinh()
}

/// Point set with an optional metric scale (distances are `scale · hdist`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<HPoint>,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl PointSet {
    pub fn new(points: Vec<HPoint>) -> Self {
        PointSet { points, scale: 1.0 }
    }

    /// Reads `rho,theta` rows; a header row is allowed.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| invalid(format!("point csv: {e}")))?;
            let parsed = (rec.get(0).map(str::parse::<f64>), rec.get(1).map(str::parse::<f64>));
            match parsed {
                (Some(Ok(rho)), Some(Ok(theta))) if rho >= 0.0 && rho.is_finite() && theta.is_finite() => {
                    points.push(HPoint::new(rho, theta))
                }
                _ if i == 0 => continue,
                _ => return Err(invalid(format!("bad point row {}", i + 1))),
            }
        }
        Ok(PointSet::new(points))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,theta\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.rho, p.theta));
        }
        out
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.scale * hdist(self.points[i], self.points[j])
    }

    pub fn min_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                m = m.min(self.distance(i, j));
            }
        }
        m
    }
}

/// Rejection sample of `count` points in the disk of radius `radius`
/// (area-uniform), pairwise at distance ≥ `min_dist`.
pub fn sample_disk<R: Rng>(radius: f64, count: usize, min_dist: f64, rng: &mut R) -> PointSet {
    let mut points: Vec<HPoint> = Vec::with_capacity(count);
    let mut attempts = 0;
    while points.len() < count && attempts < 200 * count.max(1) {
        attempts += 1;
        let u: f64 = rng.gen();
        let rho = (1.0 + u * (radius.cosh() - 1.0)).acosh();
        let p = HPoint::new(rho, rng.gen::<f64>() * TAU);
        if points.iter().all(|&q| hdist(p, q) >= min_dist) {
            points.push(p);
        }
    }
    PointSet::new(points)
}

/// Net points on the circle of one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetLayer {
    pub index: usize,
    /// Circle radius in unit-curvature coordinates.
    pub radius: f64,
    /// Net angles, ascending.
    pub angles: Vec<f64>,
    /// Candidate angles before pruning (the outer layer has none).
    pub candidates: Vec<f64>,
}

/// The funnel over the nets and where each input point lands.
#[derive(Debug, Clone)]
pub struct FunnelBuild {
    pub funnel: Funnel,
    pub layers: Vec<NetLayer>,
    /// Position of every funnel vertex.
    pub positions: Vec<HPoint>,
    /// Vertex nearest to each input point.
    pub images: Vec<usize>,
    /// Scaled distance from each input to its image.
    pub image_distance: Vec<f64>,
    /// Number of net circles; the funnel has one more layer.
    pub depth: usize,
    /// Net spacing in unit-curvature coordinates.
    pub step: f64,
    pub scale: f64,
    /// Longest graph edge measured in the scaled metric.
    pub max_edge_length: f64,
}

/// Options for [`build_funnel`].
#[derive(Debug, Clone, Copy)]
pub struct FunnelOptions {
    /// Angle where every greedy sweep starts.
    pub start_angle: f64,
    /// Reject inputs closer than this (scaled).
    pub min_distance: f64,
}

impl FunnelOptions {
    /// Sweep start drawn uniformly from the seed.
    pub fn seeded(seed: u64) -> Self {
        let start = crate::embed::sample_rng(seed, u64::MAX).gen::<f64>() * TAU;
        FunnelOptions { start_angle: start, ..Default::default() }
    }
}

impl Default for FunnelOptions {
    fn default() -> Self {
        FunnelOptions { start_angle: 0.0, min_distance: 1.0 }
    }
}

/// Angular step whose chord on the circle of radius `radius` has length `step`.
fn chord_angle(radius: f64, step: f64) -> f64 {
    let s = (step / 2.0).sinh() / radius.sinh();
    if s >= 1.0 {
        PI
    } else {
        2.0 * s.asin()
    }
}

/// Greedy sweep from candidate `k0` keeping candidates at distance ≥ `step`
/// from the last kept and from the first kept point.
fn sweep(candidates: &[f64], radius: f64, step: f64, k0: usize) -> Vec<f64> {
    let on = |a: f64| HPoint::new(radius, a);
    let mut kept: Vec<f64> = Vec::new();
    for i in 0..candidates.len() {
        let a = candidates[(k0 + i) % candidates.len()];
        let ok = match (kept.first(), kept.last()) {
            (Some(&f), Some(&l)) => hdist(on(a), on(l)) >= step && hdist(on(a), on(f)) >= step,
            _ => true,
        };
        if ok {
            kept.push(a);
        }
    }
    kept.sort_by(f64::total_cmp);
    kept
}

fn widest_gap(angles: &[f64], radius: f64) -> f64 {
    if angles.len() < 2 {
        return f64::INFINITY;
    }
    (0..angles.len())
        .map(|k| hdist(HPoint::new(radius, angles[k]), HPoint::new(radius, angles[(k + 1) % angles.len()])))
        .fold(0.0, f64::max)
}

/// Maximal `step`-separated subset of sorted candidates. The sweep starts at
/// the first candidate past `start`; where it closes the circle it can leave
/// a gap near 3·step, so a few later starts are tried and the first with all
/// gaps below 2·step wins (else the narrowest).
fn prune(candidates: &[f64], radius: f64, step: f64, start: f64) -> Vec<f64> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let k0 = candidates.partition_point(|&a| a < start) % candidates.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for t in 0..candidates.len().min(16) {
        let kept = sweep(candidates, radius, step, (k0 + t) % candidates.len());
        let g = widest_gap(&kept, radius);
        if g < 2.0 * step {
            return kept;
        }
        if best.as_ref().is_none_or(|b| g < b.0) {
            best = Some((g, kept));
        }
    }
    best.unwrap().1
}

/// Builds the funnel of a point set. Vertex 0 is the basepoint; layers
/// follow in order of radius with ascending angles.
pub fn build_funnel(set: &PointSet, opts: FunnelOptions) -> Result<FunnelBuild> {
    if set.points.is_empty() {
        return Err(invalid("empty point set"));
    }
    if !(set.scale > 0.0 && set.scale.is_finite()) {
        return Err(invalid("scale must be positive"));
    }
    let min = set.min_distance();
    if set.points.len() > 1 && min < opts.min_distance {
        return Err(invalid(format!("minimum distance {min} below {}", opts.min_distance)));
    }
    let step = NET_SPACING / set.scale;
    let max_rho = set.points.iter().map(|p| p.rho).fold(0.0, f64::max);
    let depth = ((max_rho / step) - 1e-12).ceil().max(1.0) as usize;
    let start = opts.start_angle.rem_euclid(TAU);
    // outermost circle: constant angular spacing from the start angle
    let outer_radius = depth as f64 * step;
    let phi = chord_angle(outer_radius, step) * (1.0 + 1e-9);
    let count = ((TAU / phi).floor() as usize).max(1);
    let mut outer: Vec<f64> = (0..count).map(|k| (start + k as f64 * phi).rem_euclid(TAU)).collect();
    outer.sort_by(f64::total_cmp);
    let mut layers = vec![NetLayer { index: depth, radius: outer_radius, angles: outer, candidates: Vec::new() }];
    for i in (1..depth).rev() {
        let above = &layers.last().unwrap().angles;
        let radius = i as f64 * step;
        let angles = prune(above, radius, step, start);
        layers.push(NetLayer { index: i, radius, candidates: above.clone(), angles });
    }
    layers.reverse();
    // vertex ids: basepoint 0, then layers 1..=depth
    let mut funnel_layers = vec![vec![0usize]];
    let mut positions = vec![HPoint::ORIGIN];
    let mut offsets = Vec::with_capacity(depth);
    for layer in &layers {
        offsets.push(positions.len());
        funnel_layers.push((positions.len()..positions.len() + layer.angles.len()).collect());
        positions.extend(layer.angles.iter().map(|&a| HPoint::new(layer.radius, a)));
    }
    let mut parent = std::collections::BTreeMap::new();
    for (li, layer) in layers.iter().enumerate() {
        for (k, &a) in layer.angles.iter().enumerate() {
            let id = offsets[li] + k;
            if li == 0 {
                parent.insert(id, 0);
                continue;
            }
            let up = &layers[li - 1].angles;
            let j = match up.binary_search_by(|b| b.total_cmp(&a)) {
                Ok(j) => j,
                // clockwise (descending angle) from a, wrapping around
                Err(0) => up.len() - 1,
                Err(j) => j - 1,
            };
            parent.insert(id, offsets[li - 1] + j);
        }
    }
    let funnel = Funnel { layers: funnel_layers, parent, cyclic: true };
    if let Some(v) = validate_funnel(&funnel).first() {
        return Err(crate::error::Error::Structure(format!("net funnel invalid: {}", v.detail)));
    }
    let mut max_edge = 0.0f64;
    let graph = funnel.to_graph()?;
    for e in graph.edges() {
        max_edge = max_edge.max(set.scale * hdist(positions[e.u], positions[e.v]));
    }
    let mut images = Vec::with_capacity(set.points.len());
    let mut image_distance = Vec::with_capacity(set.points.len());
    for &p in &set.points {
        let (v, d) = nearest(&layers, &offsets, step, p);
        images.push(v);
        image_distance.push(set.scale * d);
    }
    Ok(FunnelBuild {
        funnel,
        layers,
        positions,
        images,
        image_distance,
        depth,
        step,
        scale: set.scale,
        max_edge_length: max_edge,
    })
}

/// Nearest vertex: the basepoint or an angular neighbour on a nearby circle.
fn nearest(layers: &[NetLayer], offsets: &[usize], step: f64, p: HPoint) -> (usize, f64) {
    let mut best = (0usize, p.rho);
    for (li, layer) in layers.iter().enumerate() {
        if (layer.radius - p.rho).abs() > 3.0 * step || layer.angles.is_empty() {
            continue;
        }
        let a = &layer.angles;
        let j = a.partition_point(|&x| x < p.theta);
        for k in [j + a.len() - 1, j] {
            let k = k % a.len();
            let d = hdist(p, HPoint::new(layer.radius, a[k]));
            if d < best.1 {
                best = (offsets[li] + k, d);
            }
        }
    }
    best
}

/// Net quality measurements.
#[derive(Debug, Clone, Serialize)]
pub struct NetCheck {
    /// Smallest distance between circle-consecutive net points (scaled).
    pub min_spacing: f64,
    pub packing: bool,
    /// Worst sampled distance to the pre-pruning candidates (scaled).
    pub candidate_cover: f64,
    /// Worst sampled distance to the net itself (scaled).
    pub net_cover: f64,
}

/// Packing uses circle-consecutive pairs, exact because distance on a circle
/// grows with angular separation. Covering is sampled on `samples` random
/// points per circle.
pub fn check_nets<R: Rng>(b: &FunnelBuild, samples: usize, rng: &mut R) -> NetCheck {
    let spacing = NET_SPACING;
    let mut min_spacing = f64::INFINITY;
    let mut candidate_cover = 0.0f64;
    let mut net_cover = 0.0f64;
    let dist_to = |radius: f64, angles: &[f64], t: f64| -> f64 {
        if angles.is_empty() {
            return f64::INFINITY;
        }
        let j = angles.partition_point(|&x| x < t);
        [j + angles.len() - 1, j]
            .iter()
            .map(|&k| hdist(HPoint::new(radius, t), HPoint::new(radius, angles[k % angles.len()])))
            .fold(f64::INFINITY, f64::min)
    };
    for layer in &b.layers {
        let a = &layer.angles;
        if a.len() >= 2 {
            for k in 0..a.len() {
                let d = hdist(HPoint::new(layer.radius, a[k]), HPoint::new(layer.radius, a[(k + 1) % a.len()]));
                min_spacing = min_spacing.min(b.scale * d);
            }
        }
        let pre = if layer.candidates.is_empty() { a } else { &layer.candidates };
        for _ in 0..samples {
            let t = rng.gen::<f64>() * TAU;
            candidate_cover = candidate_cover.max(b.scale * dist_to(layer.radius, pre, t));
            net_cover = net_cover.max(b.scale * dist_to(layer.radius, a, t));
        }
    }
    NetCheck { min_spacing, packing: min_spacing >= spacing, candidate_cover, net_cover }
}

/// Hop distances in the funnel between the images of all input pairs,
/// compared with the scaled hyperbolic distances.
pub fn image_distortion(b: &FunnelBuild, set: &PointSet) -> Result<EmbeddingReport> {
    let graph = b.funnel.to_graph()?;
    let n = graph.n();
    let mut acc = DistortionAccumulator::new();
    for (i, &src) in b.images.iter().enumerate() {
        let mut dist = vec![u32::MAX; n];
        dist[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for &(w, _) in graph.neighbors(u) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        for j in i + 1..set.points.len() {
            acc.add(i, j, set.distance(i, j), dist[b.images[j]] as f64);
        }
    }
    Ok(acc.finish())
}

/// Outcome of a sampled geometric check.
#[derive(Debug, Clone, Serialize)]
pub struct CurveCheck {
    pub samples: usize,
    /// Largest violation found (0 when the property holds exactly).
    pub worst_violation: f64,
    pub pass: bool,
}

pub const CURVE_TOL: f64 = 1e-9;

/// Samples `t ↦ d(x*, γ(t))` along the geodesic from `x` to `y` and checks
/// discrete midpoint convexity.
pub fn check_convexity(base: HPoint, x: HPoint, y: HPoint, samples: usize) -> CurveCheck {
    let a = hdist(base, x);
    let b = hdist(base, y);
    let len = hdist(x, y);
    let sin2 = half_angle_sin2(a, len, b);
    let k = samples.max(3);
    let f: Vec<f64> = (0..k).map(|i| hinge(a, len * i as f64 / (k - 1) as f64, sin2)).collect();
    let mut worst = 0.0f64;
    for w in f.windows(3) {
        worst = worst.max(w[1] - (w[0] + w[2]) / 2.0);
    }
    CurveCheck { samples: k, worst_violation: worst.max(0.0), pass: worst <= CURVE_TOL }
}

/// Samples `t ↦ d(γ_x(t), γ_y(t))` for the geodesics from `x*` to `x` and
/// to `y`, both at constant speed, and checks it never decreases.
pub fn check_divergence(base: HPoint, x: HPoint, y: HPoint, samples: usize) -> CurveCheck {
    let a = hdist(base, x);
    let b = hdist(base, y);
    let c = hdist(x, y);
    let sin2 = half_angle_sin2(a, b, c);
    let k = samples.max(2);
    let f: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).map(|t| hinge(t * a, t * b, sin2)).collect();
    let mut worst = 0.0f64;
    for w in f.windows(2) {
        worst = worst.max(w[0] - w[1]);
    }
    CurveCheck { samples: k, worst_violation: worst.max(0.0), pass: worst <= CURVE_TOL }
}
