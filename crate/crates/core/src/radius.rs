//! Exact radii and edge-sampling rates for the cut evolution.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A positive rational radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Radius(Ratio<u64>);

impl Radius {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(num > 0 && den > 0, "radius must be positive");
        Radius(Ratio::new(num, den))
    }

    pub fn integer(k: u64) -> Self {
        Self::new(k, 1)
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    /// Number of whole levels a ball of this radius covers.
    pub fn floor(&self) -> usize {
        (self.numer() / self.denom()) as usize
    }

    pub fn as_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Whether the integer `d` lies in `[r, 6r)`.
    pub fn window_contains(&self, d: usize) -> bool {
        let d = d as u128 * self.denom() as u128;
        let n = self.numer() as u128;
        n <= d && d < 6 * n
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }
}

impl std::fmt::Display for Radius {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

/// Probability with which a qualifying boundary edge joins the shift set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRate {
    /// `min(1, 1/r)`.
    #[default]
    Unit,
    /// `min(1/2, 1/r)`; keeps the parity of the selected count random.
    Half,
}

impl EdgeRate {
    pub fn probability(&self, r: Radius) -> BigRational {
        let inv = BigRational::new(BigInt::from(r.denom()), BigInt::from(r.numer()));
        let cap = match self {
            EdgeRate::Unit => BigRational::one(),
            EdgeRate::Half => BigRational::new(BigInt::one(), BigInt::from(2)),
        };
        if inv < cap {
            inv
        } else {
            cap
        }
    }

    pub fn probability_f64(&self, r: Radius) -> f64 {
        let p = self.probability(r);
        if p.is_zero() {
            0.0
        } else {
            p.to_f64().unwrap_or(0.0)
        }
    }
}
