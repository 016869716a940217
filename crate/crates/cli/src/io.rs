use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use npcembed_core::oracle::FlowInstance;
use npcembed_core::{FiniteMetric, Funnel, Graph, PointSet, Pyramid};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Bad flags or parameters; exits with code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub enum Instance {
    Pyramid(Pyramid),
    Funnel(Funnel),
    Points(PointSet),
    Metric(FiniteMetric),
    Graph(Graph),
    Flow(FlowInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Pyramid(_) => "pyramid",
            Instance::Funnel(_) => "funnel",
            Instance::Points(_) => "points",
            Instance::Metric(_) => "metric",
            Instance::Graph(_) => "graph",
            Instance::Flow(_) => "flow",
        }
    }

    /// Shortest-path metric for graph-like instances.
    pub fn metric(&self) -> Result<FiniteMetric> {
        let g = match self {
            Instance::Pyramid(p) => p.to_graph()?,
            Instance::Funnel(f) => f.to_graph()?,
            Instance::Graph(g) => g.clone(),
            Instance::Flow(fl) => fl.graph.clone(),
            Instance::Metric(m) => return Ok(m.clone()),
            Instance::Points(s) => {
                let n = s.points.len();
                let d = (0..n * n).map(|k| s.distance(k / n, k % n)).collect();
                return Ok(FiniteMetric::new(n, d)?);
            }
        };
        Ok(npcembed_core::apsp(&g)?)
    }
}

/// Loads an instance, telling kinds apart by extension and JSON keys.
pub fn load(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok(Instance::Points(PointSet::from_csv(&text)?));
    }
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let has = |k: &str| v.get(k).is_some();
    let inst = if has("layers") && has("cyclic") {
        Instance::Funnel(Funnel::from_json(&text)?)
    } else if has("layers") {
        Instance::Pyramid(Pyramid::from_json(&text)?)
    } else if has("points") {
        Instance::Points(serde_json::from_value(v)?)
    } else if has("cap") || has("dem") {
        Instance::Flow(FlowInstance::from_json(&text)?)
    } else if has("d") {
        Instance::Metric(FiniteMetric::from_json(&text)?)
    } else if has("edges") {
        Instance::Graph(Graph::from_json(&text)?)
    } else {
        anyhow::bail!("{}: unrecognised instance format", path.display());
    };
    Ok(inst)
}

/// Writes to `out` (refusing to overwrite without `force`) or stdout.
pub fn emit(out: Option<&PathBuf>, force: bool, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if p.exists() && !force {
                return Err(usage(format!("{} exists; pass --force to overwrite", p.display())));
            }
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// First 16 hex digits of the SHA-256 of the canonical config JSON.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn budget() -> Result<u64> {
    match std::env::var("NPCEMBED_BUDGET") {
        Ok(s) => s.trim().parse().map_err(|_| usage(format!("NPCEMBED_BUDGET={s} is not a count"))),
        Err(_) => Ok(npcembed_core::embed::DEFAULT_BUDGET),
    }
}
