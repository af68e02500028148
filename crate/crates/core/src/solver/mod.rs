//! Minimal nonnegative solutions of finite affine systems x = A x + g.
//!
//! Two routes are provided. [`solve_iterative`] runs the monotone iteration
//! f⁽ⁿ⁺¹⁾ = A f⁽ⁿ⁾ + g from f⁽⁰⁾ = 0, whose iterates are certified lower bounds.
//! [`solve_direct`] factors I − A without pivoting; positive pivots certify
//! that I − A is a nonsingular M-matrix, so the unique solution is also the
//! minimal nonnegative one.

mod band;

use band::{BandLu, Factorization};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("minimal solution is infinite (witnessed at component {component})")]
    Infinite { component: usize, iterations: usize },
    #[error("iteration limit reached after {iterations} steps (increment {residual:e})")]
    Inconclusive { lower_bound: Vec<f64>, residual: f64, iterations: usize },
    #[error("iterate decreased at component {component}, iteration {iteration}")]
    NotMonotone { component: usize, iteration: usize },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("tolerance must be positive and finite")]
    BadTolerance,
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    pub n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row entry lists. Duplicate columns are summed, zeros dropped.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let start = cols.len();
            for (j, v) in r {
                assert!(j < n, "column {j} out of range for {n}x{n} matrix");
                if cols.len() > start && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            let mut w = start;
            for k in start..cols.len() {
                if vals[k] != 0.0 {
                    cols[w] = cols[k];
                    vals[w] = vals[k];
                    w += 1;
                }
            }
            cols.truncate(w);
            vals.truncate(w);
            row_ptr.push(cols.len());
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().copied().enumerate().filter(|e| e.1 != 0.0).collect())
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_rows(vec![Vec::new(); n])
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|e| e.1).sum()
    }

    /// (lower, upper) bandwidths of the sparsity pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// The pair (A, g) of x = A x + g with A ≥ 0, g ≥ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonnegAffineOperator {
    pub a: SparseMatrix,
    pub g: Vec<f64>,
}

impl NonnegAffineOperator {
    pub fn new(a: SparseMatrix, g: Vec<f64>) -> Result<Self> {
        if a.n != g.len() {
            return Err(SolverError::InvalidOperator(format!(
                "matrix is {}x{} but g has length {}",
                a.n,
                a.n,
                g.len()
            )));
        }
        if a.vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SolverError::InvalidOperator("A has a negative or non-finite entry".into()));
        }
        if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SolverError::InvalidOperator("g has a negative or non-finite entry".into()));
        }
        Ok(NonnegAffineOperator { a, g })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a.mul_vec(x);
        for (yi, gi) in y.iter_mut().zip(&self.g) {
            *yi += gi;
        }
        y
    }

    /// sup_i |x_i − (A x + g)_i|
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        NonnegAffineOperator { a: self.a.clone(), g: self.g.iter().map(|v| v * c).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Iterative,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalSolution {
    pub x: Vec<f64>,
    pub method: Method,
    pub residual: f64,
    pub iterations: usize,
    /// Set when the direct route could not factor and the iteration was used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    /// Stop when the sup increment is below tol·max(1, ‖f‖∞).
    pub tol: f64,
    pub max_iter: usize,
    /// Any component above this is declared infinite.
    pub overflow: f64,
}

impl Default for IterConfig {
    fn default() -> Self {
        IterConfig { tol: 1e-12, max_iter: 1_000_000, overflow: 1e100 }
    }
}

pub fn solve_iterative(op: &NonnegAffineOperator, tol: f64, max_iter: usize) -> Result<MinimalSolution> {
    solve_iterative_with(op, &IterConfig { tol, max_iter, ..IterConfig::default() })
}

/// Monotone iteration from zero.
///
/// Besides the overflow bound, a run of non-shrinking increments triggers an
/// M-matrix test of I − A; a failed test certifies an infinite minimal
/// solution, so ratio-one systems are reported as infinite rather than left
/// to exhaust the iteration budget.
pub fn solve_iterative_with(op: &NonnegAffineOperator, cfg: &IterConfig) -> Result<MinimalSolution> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(SolverError::BadTolerance);
    }
    let n = op.dim();
    if n == 0 {
        return Ok(MinimalSolution { x: vec![], method: Method::Iterative, residual: 0.0, iterations: 0, fallback: false });
    }
    let strictly_positive_g = op.g.iter().all(|&v| v > 0.0);
    let stall_window = (4 * n).max(1000);
    let mut f = vec![0.0; n];
    let mut prev_inc = f64::INFINITY;
    let mut stall = 0usize;
    let mut last_inc = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let next = op.apply(&f);
        let mut inc = 0.0f64;
        let mut top = 1.0f64;
        for i in 0..n {
            if !(next[i] >= f[i]) {
                if !next[i].is_finite() {
                    return Err(SolverError::Infinite { component: i, iterations: it });
                }
                return Err(SolverError::NotMonotone { component: i, iteration: it });
            }
            if next[i] > cfg.overflow || !next[i].is_finite() {
                return Err(SolverError::Infinite { component: i, iterations: it });
            }
            inc = inc.max(next[i] - f[i]);
            top = top.max(next[i]);
        }
        f = next;
        last_inc = inc;
        if inc <= cfg.tol * top {
            let residual = op.residual(&f);
            return Ok(MinimalSolution { x: f, method: Method::Iterative, residual, iterations: it, fallback: false });
        }
        if inc >= prev_inc {
            stall += 1;
        } else {
            stall = 0;
        }
        prev_inc = inc;
        if stall >= stall_window && strictly_positive_g {
            if let Factorization::NotMMatrix { row, .. } = BandLu::factor(&op.a, n < 64) {
                return Err(SolverError::Infinite { component: row, iterations: it });
            }
            stall = 0;
        }
    }
    Err(SolverError::Inconclusive { lower_bound: f, residual: last_inc, iterations: cfg.max_iter })
}

/// Solves (I − A) x = g by banded (or, below 64 unknowns, dense) LU.
///
/// A nonpositive pivot with g > 0 means the minimal solution is infinite.
/// Numerically singular or over-wide systems fall back to the iteration and
/// carry `fallback = true`.
pub fn solve_direct(op: &NonnegAffineOperator) -> Result<MinimalSolution> {
    let n = op.dim();
    if n == 0 {
        return Ok(MinimalSolution { x: vec![], method: Method::Direct, residual: 0.0, iterations: 0, fallback: false });
    }
    let strictly_positive_g = op.g.iter().all(|&v| v > 0.0);
    match BandLu::factor(&op.a, n < 64) {
        Factorization::Ok(lu) => {
            let mut x = lu.solve(&op.g);
            let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if x.iter().all(|v| v.is_finite() && *v >= -1e-10 * scale) {
                for v in x.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                let residual = op.residual(&x);
                return Ok(MinimalSolution { x, method: Method::Direct, residual, iterations: 0, fallback: false });
            }
            fallback(op)
        }
        Factorization::NotMMatrix { row } if strictly_positive_g => {
            Err(SolverError::Infinite { component: row, iterations: 0 })
        }
        _ => fallback(op),
    }
}

fn fallback(op: &NonnegAffineOperator) -> Result<MinimalSolution> {
    let mut s = solve_iterative_with(op, &IterConfig::default())?;
    s.fallback = true;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Sub,
    Super,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub sense: Sense,
    /// y_i − (A y + g)_i per component.
    pub residuals: Vec<f64>,
    pub is_super: bool,
    pub is_sub: bool,
    /// Largest violation of the requested sense (0 when it holds exactly).
    pub max_violation: f64,
    pub holds: bool,
    /// For sub-solutions: y ≤ f* additionally needs y bounded by a multiple of f*,
    /// which is not checked here.
    pub boundedness_unverified: bool,
}

/// Compares y against A y + g. Super-solutions bound f* from above; sub-solutions
/// are lower-bound candidates.
pub fn check_certificate(op: &NonnegAffineOperator, y: &[f64], sense: Sense) -> CertificateReport {
    let ay = op.apply(y);
    let residuals: Vec<f64> = y.iter().zip(&ay).map(|(a, b)| a - b).collect();
    let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let is_super = residuals.iter().all(|r| *r >= -tol);
    let is_sub = residuals.iter().all(|r| *r <= tol);
    let max_violation = match sense {
        Sense::Super => residuals.iter().fold(0.0f64, |m, r| m.max(-r)),
        Sense::Sub => residuals.iter().fold(0.0f64, |m, r| m.max(*r)),
    };
    let holds = match sense {
        Sense::Super => is_super,
        Sense::Sub => is_sub,
    };
    CertificateReport {
        sense,
        residuals,
        is_super,
        is_sub,
        max_violation,
        holds,
        boundedness_unverified: sense == Sense::Sub,
    }
}
