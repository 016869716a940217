//! Dense two-phase simplex with Bland's anti-cycling rule.

use thiserror::Error;

/// Pivot-element and reduced-cost tolerance.
pub const PIVOT_TOL: f64 = 1e-9;
/// Feasibility tolerance on the phase-one objective.
pub const REPORT_TOL: f64 = 1e-7;

const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("infeasible (phase-one residual {0:e})")]
    Infeasible(f64),
    #[error("unbounded")]
    Unbounded,
    #[error("pivot limit reached")]
    PivotLimit,
    #[error("malformed program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimize `objective · x` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram { vars, objective: vec![0.0; vars], constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self)?.run(self)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row is the objective,
    /// the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Tableau, LpError> {
        if lp.objective.len() != lp.vars {
            return Err(LpError::Malformed("objective length differs from variable count".into()));
        }
        let m = lp.constraints.len();
        let slacks = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let mut flipped: Vec<(f64, Relation)> = Vec::with_capacity(m);
        for c in &lp.constraints {
            if !c.rhs.is_finite() || c.coeffs.iter().any(|&(j, a)| j >= lp.vars || !a.is_finite()) {
                return Err(LpError::Malformed("bad coefficient or right-hand side".into()));
            }
            let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
            let rel = match (sign < 0.0, c.relation) {
                (true, Relation::Le) => Relation::Ge,
                (true, Relation::Ge) => Relation::Le,
                (_, r) => r,
            };
            flipped.push((sign, rel));
        }
        let artificials = flipped.iter().filter(|f| f.1 != Relation::Le).count();
        let first_artificial = lp.vars + slacks;
        let cols = first_artificial + artificials;
        let width = cols + 1;
        let mut t = vec![0.0; (m + 1) * width];
        let mut basis = vec![0; m];
        let (mut slack, mut art) = (lp.vars, first_artificial);
        for (i, c) in lp.constraints.iter().enumerate() {
            let (sign, rel) = flipped[i];
            let row = &mut t[i * width..(i + 1) * width];
            for &(j, a) in &c.coeffs {
                row[j] += sign * a;
            }
            row[cols] = sign * c.rhs;
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        Ok(Tableau { rows: m, cols, t, basis, first_artificial, pivots: 0 })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    /// Loads `cost` into the objective row as reduced costs.
    fn set_objective(&mut self, cost: &[f64]) {
        let width = self.cols + 1;
        let m = self.rows;
        for j in 0..width {
            self.t[m * width + j] = if j < cost.len() { cost[j] } else { 0.0 };
        }
        for i in 0..m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..width {
                    self.t[m * width + j] -= cb * self.t[i * width + j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.at(r, c);
        for j in 0..width {
            self.t[r * width + j] /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * width..(r + 1) * width].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * width + c];
            if f != 0.0 {
                let row = &mut self.t[i * width..(i + 1) * width];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule on columns `0..limit`.
    fn optimize(&mut self, limit: usize) -> Result<(), LpError> {
        let m = self.rows;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::PivotLimit);
            }
            let Some(c) = (0..limit).find(|&j| self.at(m, j) < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, self.cols) / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bv)) => ratio < br - PIVOT_TOL || (ratio <= br + PIVOT_TOL && self.basis[i] < bv),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return Err(LpError::Unbounded),
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let m = self.rows;
        if self.cols > self.first_artificial {
            let mut phase_one = vec![0.0; self.cols];
            for c in phase_one.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            self.set_objective(&phase_one);
            self.optimize(self.cols)?;
            let residual = -self.at(m, self.cols);
            if residual > REPORT_TOL {
                return Err(LpError::Infeasible(residual));
            }
            // drive artificials out of the basis where possible
            for i in 0..m {
                if self.basis[i] >= self.first_artificial {
                    if let Some(j) = (0..self.first_artificial).find(|&j| self.at(i, j).abs() > PIVOT_TOL) {
                        self.pivot(i, j);
                    }
                }
            }
        }
        self.set_objective(&lp.objective);
        self.optimize(self.first_artificial)?;
        let mut x = vec![0.0; lp.vars];
        for i in 0..m {
            if self.basis[i] < lp.vars {
                x[self.basis[i]] = self.at(i, self.cols);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { objective, x, pivots: self.pivots })
    }
}
