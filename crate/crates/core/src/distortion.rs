//! Expansion, contraction and distortion of a map between metrics.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::FiniteMetric;

/// A pair with its target/source ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRatio {
    pub x: usize,
    pub y: usize,
    pub ratio: f64,
}

/// Distortion summary. `distortion` is infinite when some pair at positive
/// source distance is collapsed; `collapsed` then counts those pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub expansion: f64,
    pub contraction: f64,
    pub distortion: f64,
    pub collapsed: usize,
    pub worst_expansion: Option<PairRatio>,
    pub worst_contraction: Option<PairRatio>,
    pub pairs: usize,
}

impl EmbeddingReport {
    pub fn is_finite(&self) -> bool {
        self.distortion.is_finite()
    }
}

/// Streaming accumulator over `(x, y, source, target)` quadruples.
#[derive(Debug, Clone, Default)]
pub struct DistortionAccumulator {
    max_ratio: Option<PairRatio>,
    min_ratio: Option<PairRatio>,
    collapsed: usize,
    pairs: usize,
}

impl DistortionAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: usize, y: usize, source: f64, target: f64) {
        if source <= 0.0 {
            return;
        }
        self.pairs += 1;
        let ratio = target / source;
        if target <= 0.0 {
            self.collapsed += 1;
        }
        let pr = PairRatio { x, y, ratio };
        if self.max_ratio.is_none_or(|m| ratio > m.ratio) {
            self.max_ratio = Some(pr);
        }
        if self.min_ratio.is_none_or(|m| ratio < m.ratio) {
            self.min_ratio = Some(pr);
        }
    }

    pub fn finish(self) -> EmbeddingReport {
        let expansion = self.max_ratio.map_or(1.0, |m| m.ratio);
        let contraction = match self.min_ratio {
            None => 1.0,
            Some(m) if m.ratio > 0.0 => 1.0 / m.ratio,
            Some(_) => f64::INFINITY,
        };
        let distortion = if self.collapsed > 0 { f64::INFINITY } else { expansion * contraction };
        EmbeddingReport {
            expansion,
            contraction,
            distortion,
            collapsed: self.collapsed,
            worst_expansion: self.max_ratio,
            worst_contraction: self.min_ratio,
            pairs: self.pairs,
        }
    }
}

/// Distortion of the identity map from `source` to the row-major `target`.
pub fn distortion(source: &FiniteMetric, target: &[f64]) -> Result<EmbeddingReport> {
    let n = source.n();
    if target.len() != n * n {
        return Err(invalid("target matrix size differs from source"));
    }
    let mut acc = DistortionAccumulator::new();
    for x in 0..n {
        for y in x + 1..n {
            acc.add(x, y, source.get(x, y), target[x * n + y]);
        }
    }
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_has_unit_distortion() {
        let m = FiniteMetric::new(3, vec![0., 1., 2., 1., 0., 1., 2., 1., 0.]).unwrap();
        let t: Vec<f64> = (0..9).map(|i| 3.0 * m.get(i / 3, i % 3)).collect();
        let r = distortion(&m, &t).unwrap();
        assert!((r.distortion - 1.0).abs() < 1e-12);
        assert!((r.expansion - 3.0).abs() < 1e-12);
    }

    #[test]
    fn collapse_is_infinite() {
        let m = FiniteMetric::new(2, vec![0., 1., 1., 0.]).unwrap();
        let r = distortion(&m, &[0.0; 4]).unwrap();
        assert!(r.distortion.is_infinite());
        assert_eq!(r.collapsed, 1);
    }
}
