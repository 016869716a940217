//! Acceptance run: one PASS/FAIL line per criterion. Failing criteria are
//! reported, not asserted; the run itself fails only on internal errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use npcembed_core::embed::{estimate, exact_distribution, sample_rng, DEFAULT_BUDGET};
use npcembed_core::oracle::{c1_lp, gap, parity_monte_carlo, parity_prob, tightest_parity_constant, FlowInstance};
use npcembed_core::pyramid::Skeleton;
use npcembed_core::surface::{
    build_funnel, check_convexity, check_divergence, check_nets, image_distortion, sample_disk, FunnelOptions,
    CURVE_TOL, NET_SPACING,
};
use npcembed_core::{
    apsp, embed_funnel, embed_pyramid, EmbedOptions, FiniteMetric, Funnel, FunnelEmbedOptions, Graph, HPoint,
    ProcessConfig, Pyramid,
};
use rand::Rng;

type Outcome = (bool, String);

fn small_corpus() -> Vec<(String, Pyramid)> {
    let mut out = Vec::new();
    for d in 2..=4 {
        out.push((format!("grid{d}"), Pyramid::grid(d)));
        out.push((format!("ray{d}"), Pyramid::single_ray(d)));
        for seed in 1..=3u64 {
            out.push((format!("rand{d}s{seed}"), Pyramid::random(d, 4, &mut sample_rng(seed, d as u64))));
        }
    }
    out
}

fn family(name: &str, delta: usize) -> Pyramid {
    match name {
        "grid" => Pyramid::grid(delta),
        _ => Pyramid::random(delta, 6, &mut sample_rng(17, delta as u64)),
    }
}

fn uniform_law() -> Outcome {
    let mut bad = 0;
    let corpus = small_corpus();
    for (name, p) in &corpus {
        let ex = exact_distribution(p, ProcessConfig::literal(), DEFAULT_BUDGET).expect("exact enumeration");
        let v = ex.uniform_law_violations(p.n());
        if !v.is_empty() {
            println!("    {name}: {} boundary-law violations", v.len());
            bad += 1;
        }
    }
    (bad == 0, format!("{} pyramids with depth <= 4, exact rationals, {bad} with violations", corpus.len()))
}

fn vertical_law() -> Outcome {
    let mut exact_bad = 0;
    for (_, p) in &small_corpus() {
        let ex = exact_distribution(p, ProcessConfig::literal(), DEFAULT_BUDGET).expect("exact enumeration");
        exact_bad += ex.vertical_violations(p.n()).len();
    }
    let samples = 200_000;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for delta in [9, 27] {
        for fam in ["grid", "random"] {
            let p = family(fam, delta);
            let s = Skeleton::new(&p).expect("skeleton");
            let vert: Vec<(usize, usize)> = (0..p.n())
                .flat_map(|x| (x + 1..p.n()).map(move |y| (x, y)))
                .filter(|&(x, y)| s.is_ancestor(x, y) || s.is_ancestor(y, x))
                .collect();
            for (label, config) in [("literal", ProcessConfig::literal()), ("repaired", ProcessConfig::repaired())] {
                let est = estimate(&p, &vert, samples, 5, config).expect("estimate");
                let z = est
                    .iter()
                    .map(|e| {
                        let sd = (e.f0 * (1.0 - e.f0) / samples as f64).sqrt();
                        if sd > 0.0 { (e.f_hat - e.f0).abs() / sd } else { (e.f_hat - e.f0).abs() * f64::INFINITY }
                    })
                    .fold(0.0f64, |a, b| if b.is_nan() { a } else { a.max(b) });
                println!("    {fam} depth {delta} {label}: {} vertical pairs, max z {z:.2}", vert.len());
                worst = worst.max(z);
                pairs += vert.len();
            }
        }
    }
    (
        exact_bad == 0 && worst <= 4.0,
        format!("exact: {exact_bad} violations; sampled: {pairs} pair checks at N = {samples}, max z {worst:.2} (limit 4)"),
    )
}

/// Largest and smallest same-layer ratio of embedded to graph distance.
fn horizontal_ratios(p: &Pyramid, config: ProcessConfig) -> (f64, f64) {
    let e = embed_pyramid(p, EmbedOptions { samples: 100_000, seed: 3, config }).expect("embed");
    let s = Skeleton::new(p).expect("skeleton");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for pe in e.pairs.iter().filter(|pe| s.depth(pe.x) == s.depth(pe.y)) {
        let r = e.scale * pe.g_hat / pe.d_graph;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

fn horizontal_stability() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for fam in ["grid", "random"] {
        let mut maxima = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for delta in [9, 27, 81] {
            let (l, h) = horizontal_ratios(&family(fam, delta), ProcessConfig::repaired());
            println!("    {fam} depth {delta}: same-layer ratio {l:.3} .. {h:.3}");
            maxima.push(h);
            lo = lo.min(l);
            hi = hi.max(h);
        }
        let mmax = maxima.iter().cloned().fold(0.0, f64::max);
        let mmin = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
        let ok = hi / lo <= 4.0 && mmax / mmin <= 2.0;
        pass &= ok;
        parts.push(format!("{fam}: spread {:.2} (limit 4), maxima ratio {:.2} (limit 2)", hi / lo, mmax / mmin));
    }
    let (l, h) = horizontal_ratios(&family("grid", 27), ProcessConfig::literal());
    println!("    literal process, grid depth 27: ratio {l:.3} .. {h:.3}");
    (pass, parts.join("; "))
}

fn pyramid_distortion() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for fam in ["grid", "random"] {
        let mut d = BTreeMap::new();
        for delta in [9, 27, 81] {
            let e = embed_pyramid(
                &family(fam, delta),
                EmbedOptions { samples: 100_000, seed: 3, config: ProcessConfig::repaired() },
            )
            .expect("embed");
            println!("    {fam} depth {delta}: distortion {:.3}", e.report.distortion);
            d.insert(delta, e.report.distortion);
        }
        let ok = d[&81] <= 2.0 * d[&9];
        pass &= ok;
        parts.push(format!("{fam} {:.2} -> {:.2}", d[&9], d[&81]));
    }
    let mut oracle_ok = 0;
    let mut oracle_n = 0;
    for (name, p) in small_corpus().into_iter().filter(|(_, p)| p.n() <= 10) {
        let e = embed_pyramid(&p, EmbedOptions { samples: 100_000, seed: 3, config: ProcessConfig::repaired() })
            .expect("embed");
        let m = apsp(&p.to_graph().expect("graph")).expect("apsp");
        let c = c1_lp(&m).expect("lp").c_star;
        oracle_n += 1;
        if c <= e.report.distortion + 1e-6 {
            oracle_ok += 1;
        } else {
            println!("    {name}: optimum {c:.4} exceeds measured {:.4}", e.report.distortion);
        }
    }
    pass &= oracle_ok == oracle_n;
    parts.push(format!("optimum <= measured on {oracle_ok}/{oracle_n} small pyramids"));
    (pass, parts.join("; "))
}

fn funnel_distortion() -> Outcome {
    let mut by_depth = BTreeMap::new();
    let mut non_contracting = true;
    for depth in [4usize, 8, 16] {
        let mut rng = sample_rng(depth as u64, 0);
        let corpus = [("cylinder", Funnel::cylinder(depth, 5)), ("random", Funnel::random(depth, 6, &mut rng))];
        let mut worst = 0.0f64;
        for (name, f) in corpus {
            let e = embed_funnel(&f, FunnelEmbedOptions { seed: 1, ..Default::default() }).expect("funnel embed");
            println!(
                "    {name} depth {depth}: n {} distortion {:.2}, mean inflation {:.2}, max widening {:.2}",
                f.n(),
                e.report.distortion,
                e.stats.mean_inflation,
                e.stats.max_widening
            );
            non_contracting &= e.stats.non_contracting;
            worst = worst.max(e.report.distortion);
        }
        by_depth.insert(depth, worst);
    }
    let growth = by_depth[&16] / by_depth[&4];
    (
        growth <= 2.0 && non_contracting,
        format!(
            "corpus max {:.2} / {:.2} / {:.2} at depth 4 / 8 / 16, growth {growth:.2} (limit 2), samples non-contracting: {non_contracting}",
            by_depth[&4], by_depth[&8], by_depth[&16]
        ),
    )
}

fn point_funnels() -> Outcome {
    let (mut packing, mut pre_cover, mut cover) = (true, 0.0f64, 0.0f64);
    let mut ks = Vec::new();
    for radius in [3.0, 5.0, 8.0] {
        let mut k_lit = 0.0f64;
        let mut k_free = 0.0f64;
        for seed in 1..=3u64 {
            let set = sample_disk(radius, 30, 1.0, &mut sample_rng(seed, radius as u64));
            let b = build_funnel(&set, FunnelOptions::seeded(seed)).expect("funnel");
            let nc = check_nets(&b, 10_000, &mut sample_rng(seed, 99));
            packing &= nc.packing;
            pre_cover = pre_cover.max(nc.candidate_cover);
            cover = cover.max(nc.net_cover);
            let r = image_distortion(&b, &set).expect("image distortion");
            k_lit = k_lit.max(r.expansion.max(r.contraction));
            k_free = k_free.max(r.distortion);
        }
        println!("    radius {radius}: K {k_lit:.2}, scale-free distortion {k_free:.2}");
        ks.push(k_lit);
    }
    let stab = ks.iter().cloned().fold(0.0, f64::max) / ks.iter().cloned().fold(f64::INFINITY, f64::min);
    let r = NET_SPACING;
    (
        stab <= 1.5 && packing && pre_cover < r && cover < 2.0 * r,
        format!(
            "K ratio across radii {stab:.2} (limit 1.5); packing {packing}; pre-pruning cover {pre_cover:.3} (limit {r}); net cover {cover:.3} (limit {})",
            2.0 * r
        ),
    )
}

fn random_point<R: Rng>(rng: &mut R) -> HPoint {
    HPoint::new(rng.gen_range(0.0..25.0), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn nonpositive_curvature() -> Outcome {
    let mut rng = sample_rng(7, 0);
    let (mut cw, mut dw) = (0.0f64, 0.0f64);
    for t in 0..1000 {
        let base = if t % 4 == 0 { HPoint::ORIGIN } else { random_point(&mut rng) };
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        cw = cw.max(check_convexity(base, x, y, 65).worst_violation);
        dw = dw.max(check_divergence(base, x, y, 65).worst_violation);
    }
    (
        cw <= CURVE_TOL && dw <= CURVE_TOL,
        format!("1000 configurations, worst convexity violation {cw:.2e}, worst divergence violation {dw:.2e}"),
    )
}

fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    Graph::unweighted(n, (1..n).map(|v| (rng.gen_range(0..v), v)).collect::<Vec<_>>()).expect("tree")
}

fn random_connected<R: Rng>(n: usize, extra: usize, rng: &mut R) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !edges.contains(&(a.min(b), a.max(b))) && !edges.contains(&(a.max(b), a.min(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::unweighted(n, edges).expect("graph")
}

fn random_pairs<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    while out.len() < k {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !out.contains(&(a, b)) && !out.contains(&(b, a)) {
            out.push((a, b));
        }
    }
    out
}

fn oracle_consistency() -> Outcome {
    let mut rng = sample_rng(8, 0);
    let mut fails = Vec::new();
    for t in 0..20 {
        let g = random_tree(3 + t % 6, &mut rng);
        let r = c1_lp(&apsp(&g).expect("apsp")).expect("lp");
        if (r.c_star - 1.0).abs() > 1e-6 {
            fails.push(format!("tree {t}: optimum {:.4}", r.c_star));
        }
        if (r.witness_distortion - r.c_star).abs() > 1e-6 {
            fails.push(format!("tree {t}: witness {:.4}", r.witness_distortion));
        }
        let inst = FlowInstance::uniform(g.clone(), &random_pairs(g.n(), 3, &mut rng)).expect("flow");
        let gr = gap(&inst).expect("gap");
        if (gr.gap - 1.0).abs() > 1e-6 || !gr.weak_duality {
            fails.push(format!("tree flow {t}: gap {:.4}", gr.gap));
        }
    }
    let c4 = apsp(&Graph::unweighted(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).expect("c4")).expect("apsp");
    let r = c1_lp(&c4).expect("lp");
    if (r.c_star - 1.0).abs() > 1e-6 || (r.witness_distortion - r.c_star).abs() > 1e-6 {
        fails.push(format!("4-cycle: optimum {:.4}", r.c_star));
    }
    let k23 = Graph::unweighted(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).expect("k23");
    let r = c1_lp(&apsp(&k23).expect("apsp")).expect("lp");
    if (r.c_star - 4.0 / 3.0).abs() > 1e-6 {
        fails.push(format!("K23: optimum {:.4}, expected 4/3", r.c_star));
    }
    let mut graphs: Vec<Graph> = vec![k23];
    for n in 5..=7 {
        graphs.push(Graph::unweighted(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle"));
    }
    for t in 0..8 {
        graphs.push(random_connected(5 + t % 4, 4, &mut rng));
    }
    let mut checked = 0;
    for (i, g) in graphs.into_iter().enumerate() {
        let m: FiniteMetric = apsp(&g).expect("apsp");
        let c = c1_lp(&m).expect("lp");
        if (c.witness_distortion - c.c_star).abs() > 1e-6 {
            fails.push(format!("graph {i}: witness {:.4} vs {:.4}", c.witness_distortion, c.c_star));
        }
        let k = 3 + i % 3;
        let inst = FlowInstance::uniform(g.clone(), &random_pairs(g.n(), k, &mut rng)).expect("flow");
        let gr = gap(&inst).expect("gap");
        if !gr.weak_duality || gr.gap < 1.0 - 1e-6 || gr.gap > c.c_star + 1e-6 {
            fails.push(format!("graph {i}: gap {:.4}, optimum {:.4}", gr.gap, c.c_star));
        }
        checked += 1;
    }
    for f in &fails {
        println!("    {f}");
    }
    (
        fails.is_empty(),
        format!("20 trees, 4-cycle, K23 at 4/3, {checked} graphs with gap <= optimum and weak duality; {} discrepancies", fails.len()),
    )
}

fn parity_bound() -> Outcome {
    let ps = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5];
    let ks = [1u32, 2, 3, 5, 10, 20, 50];
    let samples = 100_000;
    let mut worst_z = 0.0f64;
    for (i, &p) in ps.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            let q = parity_prob(p, k);
            let mc = parity_monte_carlo(p, k, samples, (i * ks.len() + j) as u64);
            let sd = (q * (1.0 - q) / samples as f64).sqrt();
            if sd > 0.0 {
                worst_z = worst_z.max((mc - q).abs() / sd);
            }
        }
    }
    let c = tightest_parity_constant(&ps, &ks);
    let holds = ps.iter().all(|&p| ks.iter().all(|&k| parity_prob(p, k) >= 0.25f64.min(c * p * k as f64) - 1e-12));
    (
        worst_z <= 4.0 && holds && c > 0.0,
        format!("closed form vs sampling max z {worst_z:.2} (limit 4); tightest constant c = {c:.4}, bound holds at c: {holds}"),
    )
}

fn cli(dir: &Path, args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_npcembed")).current_dir(dir).args(args).output().expect("run cli");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("npcembed-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let runs: [&[&str]; 6] = [
        &["gen", "pyramid", "--delta", "12", "--width", "5", "--seed", "11"],
        &["gen", "funnel", "--delta", "5", "--seed", "11"],
        &["gen", "hyperbolic-points", "--radius", "4", "--count", "12", "--seed", "11"],
        &["embed", "p.json", "--seed", "4", "--samples", "20000"],
        &["embed", "f.json", "--seed", "4", "--samples", "2000", "--peel-samples", "10"],
        &["partition-beta", "--grid", "5", "--scale", "3", "--trials", "300", "--seed", "4"],
    ];
    let files = ["p.json", "f.json", "pts.csv"];
    let mut mismatches = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let a = cli(&dir, args);
        let mut with_threads = args.to_vec();
        with_threads.extend(["--threads", "1"]);
        let b = cli(&dir, &with_threads);
        if a.0 != 0 || a != b {
            mismatches.push(args.join(" "));
        }
        if i < files.len() {
            std::fs::write(dir.join(files[i]), &a.1).expect("write instance");
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    (
        mismatches.is_empty(),
        format!("{} commands run twice (default and one thread): {} mismatches {:?}", runs.len(), mismatches.len(), mismatches),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("uniform boundary law", uniform_law),
        ("vertical separation law", vertical_law),
        ("horizontal scale stability", horizontal_stability),
        ("pyramid distortion growth", pyramid_distortion),
        ("funnel distortion growth", funnel_distortion),
        ("point-set funnels", point_funnels),
        ("nonpositive curvature checks", nonpositive_curvature),
        ("oracle self-consistency", oracle_consistency),
        ("parity bound", parity_bound),
        ("CLI determinism", determinism),
    ];
    let filter: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut passed = 0;
    let mut run = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if filter.is_some_and(|k| k != id) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = f();
        run += 1;
        passed += ok as usize;
        println!(
            "criterion {id:2} {}: {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{run} criteria pass");
}
