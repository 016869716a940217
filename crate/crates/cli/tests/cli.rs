use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("npcembed-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npcembed")).current_dir(dir).args(args).output().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn gen_grid_writes_a_pyramid() {
    let d = scratch("gen");
    let o = run(&d, &["gen", "pyramid", "--delta", "5", "--grid", "--out", "g.json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("g.json")).unwrap()).unwrap();
    assert_eq!(v["layers"].as_array().unwrap().len(), 5);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let d = scratch("force");
    fs::write(d.join("x.json"), "keep").unwrap();
    let o = run(&d, &["gen", "pyramid", "--delta", "3", "--grid", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_to_string(d.join("x.json")).unwrap(), "keep");
    let o = run(&d, &["gen", "pyramid", "--delta", "3", "--grid", "--out", "x.json", "--force"]);
    assert!(o.status.success());
}

#[test]
fn random_generation_needs_a_seed() {
    let d = scratch("seed");
    assert_eq!(run(&d, &["gen", "funnel", "--delta", "4"]).status.code(), Some(2));
    assert_eq!(run(&d, &["gen", "hyperbolic-points", "--radius", "3", "--count", "5"]).status.code(), Some(2));
}

#[test]
fn embed_is_reproducible() {
    let d = scratch("repro");
    run(&d, &["gen", "pyramid", "--delta", "9", "--seed", "2", "--out", "p.json"]);
    let a = run(&d, &["embed", "p.json", "--seed", "1", "--samples", "5000"]);
    let b = run(&d, &["embed", "p.json", "--seed", "1", "--samples", "5000"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["config_hash"].as_str().unwrap().len() == 16);
    let c = run(&d, &["embed", "p.json", "--seed", "2", "--samples", "5000"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn pairs_csv_has_a_row_per_pair() {
    let d = scratch("pairs");
    run(&d, &["gen", "pyramid", "--delta", "4", "--grid", "--out", "p.json"]);
    let o = run(&d, &["embed", "p.json", "--seed", "1", "--samples", "2000", "--pairs-csv", "pairs.csv"]);
    assert!(o.status.success());
    let rows = csv::Reader::from_path(d.join("pairs.csv")).unwrap().records().count();
    assert_eq!(rows, 7 * 6 / 2);
}

#[test]
fn exact_budget_exceeded_exits_3() {
    let d = scratch("budget");
    run(&d, &["gen", "pyramid", "--delta", "4", "--grid", "--out", "p.json"]);
    let o = Command::new(env!("CARGO_BIN_EXE_npcembed"))
        .current_dir(&d)
        .env("NPCEMBED_BUDGET", "3")
        .args(["verify", "p.json", "--level", "exact"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exact_verify_passes_on_small_grid() {
    let d = scratch("exact");
    run(&d, &["gen", "pyramid", "--delta", "4", "--grid", "--out", "p.json"]);
    let o = run(&d, &["verify", "p.json", "--level", "exact"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&o)["status"], "PASS");
}

fn oracle_c_star(dir: &Path, name: &str, g: npcembed_core::Graph) -> f64 {
    fs::write(dir.join(name), g.to_json()).unwrap();
    let o = run(dir, &["oracle", name]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    json(&o)["c_star"].as_f64().unwrap()
}

#[test]
fn oracle_separates_cycles_from_k23() {
    let d = scratch("oracle");
    let c5 = npcembed_core::Graph::unweighted(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
    assert!((oracle_c_star(&d, "c5.json", c5) - 1.0).abs() < 1e-6);
    let k23 = npcembed_core::Graph::unweighted(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
    let c = oracle_c_star(&d, "k23.json", k23);
    // Pentagonal inequality with the hubs against the leaves forces 8 <= 6c.
    assert!((c - 4.0 / 3.0).abs() < 1e-6, "{c}");
}

#[test]
fn flow_gap_on_a_star_is_one() {
    let d = scratch("flow");
    let star = npcembed_core::Graph::unweighted(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    let inst = npcembed_core::oracle::FlowInstance::uniform(star, &[(1, 2), (2, 3), (1, 3)]).unwrap();
    fs::write(d.join("star.json"), inst.to_json()).unwrap();
    let o = run(&d, &["flow-gap", "star.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((json(&o)["gap"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn partition_beta_on_a_grid() {
    let d = scratch("beta");
    let o = run(&d, &["partition-beta", "--grid", "4", "--scale", "2", "--trials", "200", "--seed", "3"]);
    assert!(o.status.success());
    assert!(json(&o)["estimate"]["beta"].as_f64().unwrap() > 0.0);
}

#[test]
fn threads_must_be_positive() {
    let d = scratch("threads");
    assert_eq!(run(&d, &["partition-beta", "--grid", "3", "--scale", "1", "--seed", "1", "--threads", "0"]).status.code(), Some(2));
}
