use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use npcembed_core::embed::{exact_distribution, sample_rng};
use npcembed_core::oracle::{c1_lp, gap, C1_MAX_POINTS};
use npcembed_core::pyramid::{validate_funnel, validate_pyramid, Violation};
use npcembed_core::reduce::{estimate_beta, glued_distances, peel, ray_surgery, Attachment, BlockShape};
use npcembed_core::surface::{
    build_funnel, check_convexity, check_divergence, check_nets, image_distortion, sample_disk, FunnelOptions, HPoint,
    NET_SPACING,
};
use npcembed_core::{
    apsp, embed_funnel, embed_pyramid, CutMeasure, EmbedOptions, EmbeddingReport, Error, Funnel, FunnelEmbedOptions,
    Graph, PointSet, ProcessConfig, Pyramid,
};
use rand::Rng;
use serde_json::{json, Value};

use crate::io::{budget, config_hash, emit, load, pretty, usage, Instance};
use crate::{Common, GenKind, Level, Process};

/// Largest funnel a point set may produce before `embed` refuses it.
const POINT_FUNNEL_LIMIT: usize = 3000;

fn need_seed(c: &Common, what: &str) -> Result<u64> {
    c.seed.ok_or_else(|| usage(format!("{what} is randomized; pass --seed")))
}

fn config(p: Process) -> ProcessConfig {
    match p {
        Process::Repaired => ProcessConfig::repaired(),
        Process::Literal => ProcessConfig::literal(),
    }
}

fn summary(r: &EmbeddingReport, samples: usize, seed: u64) -> Value {
    json!({
        "expansion": r.expansion,
        "contraction": r.contraction,
        "distortion": r.distortion,
        "collapsed_pairs": r.collapsed,
        "samples": samples,
        "seed": seed,
    })
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn gen(c: &Common, kind: GenKind) -> Result<bool> {
    let text = match kind {
        GenKind::Pyramid { delta, grid, single_ray, width } => {
            if delta == 0 || width == 0 {
                return Err(usage("--delta and --width must be at least 1"));
            }
            if grid && single_ray {
                return Err(usage("--grid and --single-ray are exclusive"));
            }
            let p = if grid {
                Pyramid::grid(delta)
            } else if single_ray || delta == 1 {
                Pyramid::single_ray(delta)
            } else {
                Pyramid::random(delta, width, &mut sample_rng(need_seed(c, "a random pyramid")?, 0))
            };
            format!("{}\n", p.to_json())
        }
        GenKind::Funnel { delta, cylinder, width } => {
            if delta == 0 || width == 0 || cylinder == Some(0) {
                return Err(usage("--delta, --width and --cylinder must be at least 1"));
            }
            let f = match cylinder {
                Some(w) => Funnel::cylinder(delta, w),
                None => Funnel::random(delta, width, &mut sample_rng(need_seed(c, "a random funnel")?, 0)),
            };
            format!("{}\n", f.to_json())
        }
        GenKind::HyperbolicPoints { radius, count, min_distance } => {
            if !(radius > 0.0) || count == 0 || !(min_distance >= 0.0) {
                return Err(usage("need --radius > 0, --count ≥ 1, --min-distance ≥ 0"));
            }
            let seed = need_seed(c, "point sampling")?;
            let set = sample_disk(radius, count, min_distance, &mut sample_rng(seed, 0));
            if set.points.len() < count {
                bail!("placed only {} of {count} points at distance ≥ {min_distance}", set.points.len());
            }
            let csv = c.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
            if csv {
                set.to_csv()
            } else {
                format!("{}\n", serde_json::to_string_pretty(&set)?)
            }
        }
    };
    emit(c.out.as_ref(), c.force, &text)?;
    Ok(true)
}

fn write_pairs_csv(path: &Path, force: bool, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if path.exists() && !force {
        return Err(usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn embed(c: &Common, path: &Path, peel_samples: usize, process: Process, pairs_csv: Option<&PathBuf>) -> Result<bool> {
    let seed = need_seed(c, "embed")?;
    let inst = load(path)?;
    let cfg = config(process);
    let process_name = match process {
        Process::Repaired => "repaired",
        Process::Literal => "literal",
    };
    let (report, pass, table_header, rows): (Value, bool, Vec<&str>, Vec<Vec<String>>) = match &inst {
        Instance::Pyramid(p) => {
            let samples = c.samples.unwrap_or(100_000);
            let e = embed_pyramid(p, EmbedOptions { samples, seed, config: cfg })?;
            let threshold = c.tolerance.unwrap_or(4.0);
            let vpass = e.vertical.max_z <= threshold;
            let cfg_v = json!({"command": "embed", "kind": "pyramid", "samples": samples, "seed": seed, "process": process_name});
            let rows = e
                .pairs
                .iter()
                .map(|q| {
                    vec![q.x, q.y].into_iter().map(|v| v.to_string()).chain(
                        [q.d_graph, q.f_hat, q.f0, q.g_hat, q.stderr].iter().map(|v| v.to_string()),
                    )
                    .collect()
                })
                .collect();
            let report = json!({
                "command": "embed",
                "kind": "pyramid",
                "config": cfg_v,
                "config_hash": config_hash(&cfg_v),
                "summary": summary(&e.report, samples, seed),
                "depth": e.depth,
                "scale": e.scale,
                "vertical": {"pairs": e.vertical.pairs, "max_z": e.vertical.max_z, "threshold": threshold, "status": status(vpass)},
                "pairs": e.pairs,
            });
            (report, vpass, vec!["x", "y", "d_graph", "f_hat", "f0", "g_hat", "stderr"], rows)
        }
        Instance::Funnel(f) => {
            let samples = c.samples.unwrap_or(10_000);
            let opts = FunnelEmbedOptions { peel_samples, mc_samples: samples, seed, config: cfg, attachment: Attachment::default() };
            let e = embed_funnel(f, opts)?;
            let cfg_v = json!({"command": "embed", "kind": "funnel", "samples": samples, "peel_samples": peel_samples, "seed": seed, "process": process_name});
            let (pairs, rows) = pair_table(&apsp(&f.to_graph()?)?, &e.measure, &(0..f.n()).collect::<Vec<_>>());
            let report = json!({
                "command": "embed",
                "kind": "funnel",
                "config": cfg_v,
                "config_hash": config_hash(&cfg_v),
                "summary": summary(&e.report, samples, seed),
                "peel": e.stats,
                "pairs": pairs,
            });
            let pass = e.stats.non_contracting;
            (report, pass, vec!["x", "y", "d_graph", "embedded"], rows)
        }
        Instance::Points(set) => {
            let samples = c.samples.unwrap_or(10_000);
            let b = build_funnel(set, FunnelOptions::seeded(seed))?;
            if b.funnel.n() > POINT_FUNNEL_LIMIT {
                return Err(Error::Budget { needed: b.funnel.n() as f64, budget: POINT_FUNNEL_LIMIT as u64 }.into());
            }
            let opts = FunnelEmbedOptions { peel_samples, mc_samples: samples, seed, config: cfg, attachment: Attachment::default() };
            let e = embed_funnel(&b.funnel, opts)?;
            let metric = inst.metric()?;
            let (pairs, rows) = pair_table(&metric, &e.measure, &b.images);
            let mut acc = npcembed_core::distortion::DistortionAccumulator::new();
            for p in pairs.as_array().unwrap() {
                acc.add(0, 0, p["d_source"].as_f64().unwrap(), p["embedded"].as_f64().unwrap());
            }
            let r = acc.finish();
            let cfg_v = json!({"command": "embed", "kind": "points", "samples": samples, "peel_samples": peel_samples, "seed": seed, "process": process_name});
            let report = json!({
                "command": "embed",
                "kind": "points",
                "config": cfg_v,
                "config_hash": config_hash(&cfg_v),
                "summary": summary(&r, samples, seed),
                "funnel": {"vertices": b.funnel.n(), "depth": b.depth, "max_edge_length": b.max_edge_length},
                "peel": e.stats,
                "pairs": pairs,
            });
            (report, e.stats.non_contracting, vec!["x", "y", "d_graph", "embedded"], rows)
        }
        other => bail!("embed takes a pyramid, funnel or point set, not a {}", other.kind()),
    };
    if let Some(p) = pairs_csv {
        write_pairs_csv(p, c.force, &table_header, &rows)?;
    }
    emit(c.out.as_ref(), c.force, &pretty(&report))?;
    Ok(pass)
}

/// Pairs of source points with their source distance and embedded distance
/// (points map to measure vertices through `image`).
fn pair_table(source: &npcembed_core::FiniteMetric, mu: &CutMeasure, image: &[usize]) -> (Value, Vec<Vec<String>>) {
    let mut pairs = Vec::new();
    let mut rows = Vec::new();
    for x in 0..image.len() {
        for y in x + 1..image.len() {
            let d = source.get(x, y);
            let e = mu.distance(image[x], image[y]);
            pairs.push(json!({"x": x, "y": y, "d_source": d, "embedded": e}));
            rows.push(vec![x.to_string(), y.to_string(), d.to_string(), e.to_string()]);
        }
    }
    (Value::Array(pairs), rows)
}

struct Checks(Vec<Value>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool, detail: Value) {
        self.0.push(json!({"name": name, "status": status(pass), "detail": detail}));
    }

    fn violations(&mut self, name: &str, v: &[Violation]) {
        let detail = v.iter().map(|x| json!({"condition": x.condition, "detail": x.detail})).collect::<Vec<_>>();
        self.add(name, v.is_empty(), Value::Array(detail));
    }

    fn pass(&self) -> bool {
        self.0.iter().all(|c| c["status"] == "PASS")
    }
}

pub fn verify(c: &Common, path: &Path, level: Level) -> Result<bool> {
    let inst = load(path)?;
    let mut checks = Checks(Vec::new());
    let threshold = c.tolerance.unwrap_or(4.0);
    let exact = level == Level::Exact;
    let mut cfg_v = json!({"command": "verify", "kind": inst.kind(), "level": if exact { "exact" } else { "quick" }});
    match &inst {
        Instance::Pyramid(p) => {
            let v = validate_pyramid(p);
            checks.violations("pyramid conditions", &v);
            if !v.is_empty() {
            } else if exact {
                if p.depth() > 4 {
                    return Err(usage("exact verification needs a pyramid with Δ ≤ 4"));
                }
                let ex = exact_distribution(p, ProcessConfig::literal(), budget()?)?;
                let bad = ex.uniform_law_violations(p.n());
                let detail: Vec<Value> = bad.iter().map(|(i, v, q)| json!({"step": i, "vertex": v, "probability": q.to_string()})).collect();
                checks.add("uniform boundary law (exact)", bad.is_empty(), json!({"depth": ex.prep.depth(), "violations": detail}));
                let vb = ex.vertical_violations(p.n());
                checks.add("vertical pairs (exact)", vb.is_empty(), json!({"violations": vb}));
                let mass_ok = (0..ex.steps.len()).all(|i| ex.total_mass(i).to_string() == "1");
                checks.add("probability mass", mass_ok, json!({"steps": ex.steps.len()}));
            } else {
                let seed = need_seed(c, "quick verification")?;
                let samples = c.samples.unwrap_or(20_000);
                cfg_v["samples"] = json!(samples);
                cfg_v["seed"] = json!(seed);
                let e = embed_pyramid(p, EmbedOptions { samples, seed, config: ProcessConfig::default() })?;
                checks.add(
                    "vertical pairs (Monte Carlo)",
                    e.vertical.max_z <= threshold,
                    json!({"pairs": e.vertical.pairs, "max_z": e.vertical.max_z, "threshold": threshold}),
                );
                checks.add("finite distortion", e.report.is_finite(), json!(e.report.distortion));
            }
        }
        Instance::Funnel(f) => {
            if exact {
                return Err(usage("exact verification needs a pyramid (Δ ≤ 4) or a metric (n ≤ 12)"));
            }
            let v = validate_funnel(f);
            checks.violations("funnel conditions", &v);
            if v.is_empty() {
                let seed = need_seed(c, "quick verification")?;
                cfg_v["seed"] = json!(seed);
                let mut rng = sample_rng(seed, 0);
                for k in 0..f.layers.last().unwrap().len() {
                    let s = ray_surgery(f, Some(k), &mut rng)?;
                    let shapes = [BlockShape::Peel, BlockShape::Open, BlockShape::KeepLeft, BlockShape::KeepRight];
                    let blocks_ok = shapes.iter().all(|&sh| (sh != BlockShape::Peel && s.grid.is_empty()) || s.block(sh).is_ok());
                    checks.add(&format!("ray {k}: peel set dilation 1"), s.dilation == 1.0, json!(s.dilation));
                    checks.add(&format!("ray {k}: blocks are pyramids"), blocks_ok, Value::Null);
                    let sample = peel(&s, Attachment::default(), &mut rng)?;
                    let gm = glued_distances(&s, &sample)?;
                    let n = s.widened.n();
                    let ok = (0..n).all(|x| (0..n).all(|y| gm.get(x, y) + 1e-9 >= s.metric.get(x, y)));
                    checks.add(&format!("ray {k}: peel sample non-contracting"), ok, json!({"copies": sample.copies.len()}));
                }
            }
        }
        Instance::Points(set) => {
            if exact {
                return Err(usage("exact verification needs a pyramid (Δ ≤ 4) or a metric (n ≤ 12)"));
            }
            let seed = need_seed(c, "quick verification")?;
            cfg_v["seed"] = json!(seed);
            let b = build_funnel(set, FunnelOptions::seeded(seed))?;
            checks.violations("funnel conditions", &validate_funnel(&b.funnel));
            let nets = check_nets(&b, c.samples.unwrap_or(10_000), &mut sample_rng(seed, 1));
            let r = NET_SPACING;
            checks.add("net packing", nets.packing, json!(nets.min_spacing));
            checks.add("pre-pruning cover < r", nets.candidate_cover < r, json!(nets.candidate_cover));
            checks.add("net cover < 2r", nets.net_cover < 2.0 * r, json!(nets.net_cover));
            let worst_image = b.image_distance.iter().cloned().fold(0.0, f64::max);
            checks.add("images within 2r", worst_image < 2.0 * r, json!(worst_image));
            let mut imgs = b.images.clone();
            imgs.sort_unstable();
            imgs.dedup();
            checks.add("images injective", imgs.len() == b.images.len(), Value::Null);
            let k = image_distortion(&b, set)?;
            checks.add("image distortion finite", k.is_finite(), json!(k.distortion));
            let (conv, div) = npc_checks(set, seed, 200);
            checks.add("geodesic convexity", conv.0, json!(conv.1));
            checks.add("geodesic divergence", div.0, json!(div.1));
        }
        Instance::Metric(_) | Instance::Graph(_) => {
            let m = inst.metric()?;
            checks.add("metric axioms", true, json!({"n": m.n()}));
            if m.n() <= C1_MAX_POINTS {
                let r = c1_lp(&m)?;
                let ok = (r.witness_distortion - r.c_star).abs() <= 1e-6 && r.c_star >= 1.0 - 1e-7;
                checks.add("c1 witness reproduces optimum", ok, json!({"c_star": r.c_star, "witness": r.witness_distortion}));
            } else if exact {
                return Err(usage(format!("exact verification of metrics needs n ≤ {C1_MAX_POINTS}")));
            }
        }
        Instance::Flow(fl) => {
            let g = gap(fl)?;
            checks.add("weak duality", g.weak_duality, json!({"cuts": g.cuts_checked}));
            checks.add("gap ≥ 1", g.gap >= 1.0 - 1e-6, json!(g.gap));
        }
    }
    let pass = checks.pass();
    let report = json!({
        "command": "verify",
        "config": cfg_v,
        "config_hash": config_hash(&cfg_v),
        "checks": checks.0,
        "status": status(pass),
    });
    emit(c.out.as_ref(), c.force, &pretty(&report))?;
    Ok(pass)
}

/// Convexity and divergence on random triples of input points about the
/// basepoint and about an input point.
fn npc_checks(set: &PointSet, seed: u64, trials: usize) -> ((bool, f64), (bool, f64)) {
    use npcembed_core::surface::CURVE_TOL;
    let n = set.points.len();
    let (mut cw, mut dw) = (0.0f64, 0.0f64);
    if n >= 2 {
        let mut rng = sample_rng(seed, 2);
        for t in 0..trials {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            if j == i {
                j = (i + 1) % n;
            }
            let base = if t % 2 == 0 { HPoint::ORIGIN } else { set.points[rng.gen_range(0..n)] };
            let (x, y) = (set.points[i], set.points[j]);
            cw = cw.max(check_convexity(base, x, y, 65).worst_violation);
            dw = dw.max(check_divergence(base, x, y, 65).worst_violation);
        }
    }
    ((cw <= CURVE_TOL, cw), (dw <= CURVE_TOL, dw))
}

pub fn oracle(c: &Common, path: &Path) -> Result<bool> {
    let inst = load(path)?;
    let m = inst.metric()?;
    let r = c1_lp(&m)?;
    let cuts: Vec<Value> = r.witness.cuts().iter().map(|(s, w)| json!({"side": s.iter().collect::<Vec<_>>(), "w": w})).collect();
    let pass = (r.witness_distortion - r.c_star).abs() <= 1e-6;
    let cfg_v = json!({"command": "oracle", "kind": inst.kind(), "n": m.n()});
    let report = json!({
        "command": "oracle",
        "config": cfg_v,
        "config_hash": config_hash(&cfg_v),
        "c_star": r.c_star,
        "witness_distortion": r.witness_distortion,
        "witness": {"n": m.n(), "cuts": cuts},
        "status": status(pass),
    });
    emit(c.out.as_ref(), c.force, &pretty(&report))?;
    Ok(pass)
}

pub fn flow_gap(c: &Common, path: &Path) -> Result<bool> {
    let Instance::Flow(fl) = load(path)? else {
        bail!("flow-gap needs a flow instance ({{\"graph\", \"cap\", \"dem\"}})");
    };
    let g = gap(&fl)?;
    let mut c1 = Value::Null;
    let mut within_c1 = true;
    if fl.graph.n() <= C1_MAX_POINTS {
        let r = c1_lp(&apsp(&fl.graph)?)?;
        within_c1 = g.gap <= r.c_star + 1e-6;
        c1 = json!(r.c_star);
    }
    let pass = g.weak_duality && g.gap >= 1.0 - 1e-6 && within_c1;
    let cfg_v = json!({"command": "flow-gap", "n": fl.graph.n(), "demands": fl.demands.len()});
    let report = json!({
        "command": "flow-gap",
        "config": cfg_v,
        "config_hash": config_hash(&cfg_v),
        "epsilon": g.epsilon,
        "min_sparsity": g.min_sparsity,
        "best_cut": g.best_cut,
        "gap": g.gap,
        "c1": c1,
        "gap_within_c1": within_c1,
        "weak_duality": g.weak_duality,
        "cuts_checked": g.cuts_checked,
        "status": status(pass),
    });
    emit(c.out.as_ref(), c.force, &pretty(&report))?;
    Ok(pass)
}

pub fn partition_beta(c: &Common, path: Option<&PathBuf>, grid: Option<usize>, scale: f64, trials: usize) -> Result<bool> {
    let seed = need_seed(c, "partition sampling")?;
    if !(scale > 0.0) || trials == 0 {
        return Err(usage("need --scale > 0 and --trials ≥ 1"));
    }
    let (m, source) = match (path, grid) {
        (Some(p), None) => (load(p)?.metric()?, json!(p.file_name().map(|f| f.to_string_lossy().into_owned()))),
        (None, Some(w)) if w >= 1 => (apsp(&grid_graph(w))?, json!(format!("grid {w}x{w}"))),
        _ => return Err(usage("give exactly one of an instance path or --grid W (W ≥ 1)")),
    };
    let b = estimate_beta(&m, scale, trials, seed);
    let pass = b.max_cluster_diameter <= scale;
    let cfg_v = json!({"command": "partition-beta", "source": source, "scale": scale, "trials": trials, "seed": seed});
    let report = json!({
        "command": "partition-beta",
        "config": cfg_v,
        "config_hash": config_hash(&cfg_v),
        "estimate": b,
        "status": status(pass),
    });
    emit(c.out.as_ref(), c.force, &pretty(&report))?;
    Ok(pass)
}

fn grid_graph(w: usize) -> Graph {
    let mut e = Vec::new();
    for i in 0..w {
        for j in 0..w {
            if i + 1 < w {
                e.push((i * w + j, (i + 1) * w + j));
            }
            if j + 1 < w {
                e.push((i * w + j, i * w + j + 1));
            }
        }
    }
    Graph::unweighted(w * w, e).expect("grid graph is valid")
}
