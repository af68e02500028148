//! Explicit criteria for single-birth processes.
//!
//! A single-birth chain moves up by exactly one step (rate q_{n,n+1} > 0) and
//! down arbitrarily. With q_n^(k) = Σ_{j≤k} q_nj the tableau is
//!
//! * F_n^(n) = 1,  F_n^(i) = (1/q_{n,n+1}) Σ_{k=i}^{n-1} q_n^(k) F_k^(i)
//! * d_0 = 0,  d_n = (1/q_{n,n+1}) (1 + Σ_{k<n} q_n^(k) d_k)
//!
//! and with S_k = Σ_{n≤k} F_n^(0), D_k = Σ_{n≤k} d_n the chain is recurrent iff
//! S_∞ = ∞, ergodic iff d = sup_k D_k/S_k < ∞, and strongly ergodic iff
//! sup_k (S_k d − D_k) < ∞.
//!
//! For the truncation at level N (unknowns 1..N, H = {0}) the minimal
//! solution is x_k = x_1 S_{k-1} − D_{k-1} with x_1 = D_N/S_N, so the running
//! sup D_k/S_k at N coincides with x_1^(N) and the maximum of the truncated
//! solution equals the strong functional evaluated at d = D_N/S_N.

use crate::chain::{build_truncated_system, ChainError, Generator, SystemSource, TargetSet};
use crate::classifier::{boundedness_verdict_at, BoundednessVerdict, ClassifierError, VerdictRule, VerdictState};
use crate::solver::{solve_direct, SolverError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SbError {
    #[error("model is not a single-birth process")]
    NotSingleBirth,
    #[error("tableau depth must be at least 1")]
    ZeroDepth,
    #[error("full tableau limited to {max} rows, requested {requested}")]
    TooLarge { requested: usize, max: usize },
    #[error("invalid rates at row {row}: {reason}")]
    InvalidRates { row: usize, reason: String },
    #[error("d is not finite on the evidence ({0}); strong criterion not applicable")]
    NonFiniteD(String),
    #[error("closed form disagrees with direct solve: relative difference {0:e}")]
    Mismatch(f64),
    #[error("truncated solution not positive at state {0}")]
    NotPositive(usize),
    #[error("model looks transient (partial sums of F converge)")]
    Transient,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Verdict(#[from] ClassifierError),
}

pub type Result<T> = std::result::Result<T, SbError>;

/// Up rates and below-diagonal rates of a single-birth Q-matrix.
pub trait SingleBirthRates: Send + Sync {
    /// q_{n,n+1} > 0
    fn up(&self, n: usize) -> f64;
    /// (k, q_nk) for k < n with q_nk > 0.
    fn below(&self, n: usize) -> Vec<(usize, f64)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableauMode {
    /// Full lower-triangular F (quadratic memory).
    Full,
    /// F_n^(0), d_n and partial sums only; the full table is kept for the
    /// first rows as a cross-check.
    Streaming,
}

/// Full mode is refused beyond this many rows.
pub const FULL_MAX_ROWS: usize = 8192;
/// Rows kept in full form by streaming mode for the cross-check.
pub const CROSS_CHECK_ROWS: usize = 1024;
/// Automatic mode switch.
pub const AUTO_FULL_ROWS: usize = 4096;

const RESCALE_AT: f64 = 1e300;
const RESCALE_BY: f64 = 1e-300;
/// Tail sums over fewer than this many rows are summed directly instead of
/// differenced from prefix sums.
const DIRECT_TAIL: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub rows: usize,
    pub max_rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBirthTableau {
    depth: usize,
    mode: TableauMode,
    // stored values times exp(ln_scale) are the true values
    f0: Vec<f64>,
    d: Vec<f64>,
    s: Vec<f64>,
    dsum: Vec<f64>,
    d_sup: Vec<f64>,
    ln_scale: f64,
    full: Vec<Vec<f64>>,
    pub cross_check: CrossCheck,
    pub overflow_row: Option<usize>,
}

pub fn build_tableau(sb: &dyn SingleBirthRates, k: usize) -> Result<SingleBirthTableau> {
    let mode = if k < AUTO_FULL_ROWS { TableauMode::Full } else { TableauMode::Streaming };
    build_tableau_with(sb, k, mode)
}

/// Builds rows 0..=k.
pub fn build_tableau_with(sb: &dyn SingleBirthRates, k: usize, mode: TableauMode) -> Result<SingleBirthTableau> {
    if k == 0 {
        return Err(SbError::ZeroDepth);
    }
    if mode == TableauMode::Full && k >= FULL_MAX_ROWS {
        return Err(SbError::TooLarge { requested: k + 1, max: FULL_MAX_ROWS });
    }
    let rows = k + 1;
    let mut t = SingleBirthTableau {
        depth: k,
        mode,
        f0: Vec::with_capacity(rows),
        d: Vec::with_capacity(rows),
        s: Vec::with_capacity(rows),
        dsum: Vec::with_capacity(rows),
        d_sup: Vec::with_capacity(rows),
        ln_scale: 0.0,
        full: Vec::new(),
        cross_check: CrossCheck { rows: 0, max_rel_diff: 0.0 },
        overflow_row: None,
    };
    let mut ups = Vec::with_capacity(rows);
    t.f0.push(1.0);
    t.d.push(0.0);
    t.s.push(1.0);
    t.dsum.push(0.0);
    t.d_sup.push(0.0);
    ups.push(check_up(sb, 0)?);
    for n in 1..rows {
        let up = check_up(sb, n)?;
        ups.push(up);
        let below = sb.below(n);
        let one = (-t.ln_scale).exp();
        let (mut fsum, mut dacc) = (0.0, 0.0);
        for &(j, q) in &below {
            if j >= n || !(q.is_finite() && q >= 0.0) {
                return Err(SbError::InvalidRates { row: n, reason: format!("below entry ({j}, {q})") });
            }
            // Σ_{k=j}^{n-1} F_k and Σ_{k=j}^{n-1} d_k
            let (tf, td) = if n - j <= DIRECT_TAIL {
                (t.f0[j..n].iter().sum::<f64>(), t.d[j..n].iter().sum::<f64>())
            } else {
                let (sj, dj) = if j == 0 { (0.0, 0.0) } else { (t.s[j - 1], t.dsum[j - 1]) };
                (t.s[n - 1] - sj, t.dsum[n - 1] - dj)
            };
            fsum += q * tf;
            dacc += q * td;
        }
        let fnew = fsum / up;
        let dnew = (one + dacc) / up;
        t.f0.push(fnew);
        t.d.push(dnew);
        t.s.push(t.s[n - 1] + fnew);
        t.dsum.push(t.dsum[n - 1] + dnew);
        let ratio = t.dsum[n] / t.s[n];
        t.d_sup.push(t.d_sup[n - 1].max(ratio));
        if !(t.s[n].is_finite() && t.dsum[n].is_finite()) {
            t.overflow_row = Some(n);
            t.depth = n - 1;
            for v in [&mut t.f0, &mut t.d, &mut t.s, &mut t.dsum, &mut t.d_sup] {
                v.truncate(n);
            }
            break;
        }
        if t.s[n] > RESCALE_AT || t.dsum[n] > RESCALE_AT {
            for v in [&mut t.f0, &mut t.d, &mut t.s, &mut t.dsum] {
                v.iter_mut().for_each(|x| *x *= RESCALE_BY);
            }
            t.ln_scale -= RESCALE_BY.ln();
        }
    }
    let full_rows = match mode {
        TableauMode::Full => t.depth + 1,
        TableauMode::Streaming => (t.depth + 1).min(CROSS_CHECK_ROWS),
    };
    t.build_full(sb, &ups, full_rows);
    Ok(t)
}

fn check_up(sb: &dyn SingleBirthRates, n: usize) -> Result<f64> {
    let up = sb.up(n);
    if !(up.is_finite() && up > 0.0) {
        return Err(SbError::InvalidRates { row: n, reason: format!("up rate {up}") });
    }
    Ok(up)
}

impl SingleBirthTableau {
    /// Full triangular F plus the second d_n form as a cross-check.
    fn build_full(&mut self, sb: &dyn SingleBirthRates, ups: &[f64], rows: usize) {
        // cum[n][i] = Σ_{k=i}^{n} F_k^(i)
        let mut f: Vec<Vec<f64>> = Vec::with_capacity(rows);
        let mut cum: Vec<Vec<f64>> = Vec::with_capacity(rows);
        let mut max_rel = 0.0f64;
        let mut checked = 0;
        for n in 0..rows {
            let mut row = vec![0.0; n + 1];
            let mut crow = vec![0.0; n + 1];
            row[n] = 1.0;
            if n > 0 {
                let below = sb.below(n);
                for i in 0..n {
                    let mut acc = 0.0;
                    for &(j, q) in &below {
                        let lo = i.max(j);
                        let prev = if lo > i { cum[lo - 1][i] } else { 0.0 };
                        acc += q * (cum[n - 1][i] - prev);
                    }
                    row[i] = acc / ups[n];
                }
                for i in 0..n {
                    crow[i] = cum[n - 1][i] + row[i];
                }
            }
            crow[n] = 1.0;
            if n >= 1 {
                let alt: f64 = (1..=n).map(|k| row[k] / ups[k]).sum();
                let d = self.d(n);
                if alt.is_finite() && d.is_finite() {
                    let rel = (alt - d).abs() / d.abs().max(f64::MIN_POSITIVE);
                    max_rel = max_rel.max(rel);
                    checked += 1;
                }
            }
            f.push(row);
            cum.push(crow);
        }
        self.cross_check = CrossCheck { rows: checked, max_rel_diff: max_rel };
        if self.mode == TableauMode::Full {
            self.full = f;
        }
    }

    /// Largest row index K.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mode(&self) -> TableauMode {
        self.mode
    }

    fn unscale(&self, v: f64) -> f64 {
        if self.ln_scale == 0.0 {
            v
        } else {
            v * self.ln_scale.exp()
        }
    }

    /// F_n^(0)
    pub fn f0(&self, n: usize) -> f64 {
        self.unscale(self.f0[n])
    }

    pub fn d(&self, n: usize) -> f64 {
        self.unscale(self.d[n])
    }

    /// S_n = Σ_{k≤n} F_k^(0)
    pub fn partial_f(&self, n: usize) -> f64 {
        self.unscale(self.s[n])
    }

    /// D_n = Σ_{k≤n} d_k
    pub fn partial_d(&self, n: usize) -> f64 {
        self.unscale(self.dsum[n])
    }

    /// max_{k≤n} D_k/S_k
    pub fn d_sup(&self, n: usize) -> f64 {
        self.d_sup[n]
    }

    /// F_n^(k) when the full table is held.
    pub fn full_entry(&self, n: usize, k: usize) -> Option<f64> {
        self.full.get(n).and_then(|r| r.get(k)).copied()
    }

    pub fn ln_scale(&self) -> f64 {
        self.ln_scale
    }

    /// Σ_{j≤k} (F_j^(0) d − d_j) = S_k d − D_k
    pub fn strong_partial(&self, k: usize, d: f64) -> f64 {
        self.unscale(self.s[k] * d - self.dsum[k])
    }

    /// max_{k<upto} of the strong partial sums at d.
    pub fn strong_max(&self, upto: usize, d: f64) -> f64 {
        let m = (0..upto).map(|k| self.s[k] * d - self.dsum[k]).fold(f64::NEG_INFINITY, f64::max);
        self.unscale(m)
    }

    /// Maximum of the truncated minimal solution at level N (unknowns 1..N):
    /// max_{1≤k≤N} (S_{k-1} ρ_N − D_{k-1}) with ρ_N = D_N/S_N.
    pub fn truncated_max(&self, n: usize) -> f64 {
        let rho = self.dsum[n] / self.s[n];
        self.strong_max(n, rho)
    }

    /// Evidence levels: 2^m for m ≥ 4 (or from 1 for shallow tableaux) up to K, plus K.
    pub fn sample_levels(&self) -> Vec<usize> {
        sample_levels(self.depth)
    }
}

pub fn sample_levels(k: usize) -> Vec<usize> {
    let start = if k >= 64 { 16 } else { 1 };
    let mut v = Vec::new();
    let mut p = start;
    while p <= k {
        v.push(p);
        p *= 2;
    }
    if v.last() != Some(&k) {
        v.push(k);
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitVerdict {
    pub verdict: BoundednessVerdict,
    /// (level, value) evidence pairs.
    pub samples: Vec<(usize, f64)>,
    /// Extrapolated limit when Converged.
    pub estimate: Option<f64>,
    pub note: Option<String>,
}

fn verdict_on(samples: Vec<(usize, f64)>, rule: &VerdictRule) -> Result<ExplicitVerdict> {
    let levels: Vec<usize> = samples.iter().map(|s| s.0).collect();
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let verdict = boundedness_verdict_at(&levels, &values, rule)?;
    let estimate = match verdict.state {
        VerdictState::Converged { limit } => Some(extrapolate(&samples).unwrap_or(limit)),
        _ => None,
    };
    Ok(ExplicitVerdict { verdict, samples, estimate, note: None })
}

/// Limit estimate from the power-of-two samples by repeated Aitken Δ².
/// Falls back to a single pass, then to the last value, when the
/// denominators degenerate.
pub fn extrapolate(samples: &[(usize, f64)]) -> Option<f64> {
    let pow2: Vec<f64> = samples.iter().filter(|s| s.0.is_power_of_two()).map(|s| s.1).collect();
    let last = pow2.last().copied()?;
    let aitken = |v: &[f64]| -> Option<Vec<f64>> {
        let out: Vec<f64> = v
            .windows(3)
            .map(|w| {
                let (a, b, c) = (w[0], w[1], w[2]);
                let den = (c - b) - (b - a);
                if den.abs() <= 1e-300 || (c - b).abs() <= 1e-15 * c.abs() {
                    c
                } else {
                    c - (c - b) * (c - b) / den
                }
            })
            .collect();
        (out.iter().all(|x| x.is_finite()) && !out.is_empty()).then_some(out)
    };
    let sane = |x: f64, v: &[f64]| {
        let n = v.len();
        let step = (v[n - 1] - v[n - 2]).abs();
        x.is_finite() && x >= v[n - 1] - 1e-12 * v[n - 1].abs() && x - v[n - 1] <= 20.0 * step + 1e-12 * v[n - 1].abs()
    };
    if pow2.len() >= 5 {
        let tail = &pow2[pow2.len() - 5..];
        if let Some(once) = aitken(tail) {
            if let Some(twice) = aitken(&once) {
                let x = *twice.last().unwrap();
                if sane(x, tail) {
                    return Some(x);
                }
            }
        }
    }
    if pow2.len() >= 3 {
        let tail = &pow2[pow2.len() - 3..];
        if let Some(once) = aitken(tail) {
            let x = once[0];
            if sane(x, tail) {
                return Some(x);
            }
        }
    }
    Some(last)
}

/// Verdict on the running d_sup sequence.
pub fn ergodicity_explicit(t: &SingleBirthTableau, rule: &VerdictRule) -> Result<ExplicitVerdict> {
    ergodicity_explicit_at(t, &t.sample_levels(), rule)
}

pub fn ergodicity_explicit_at(t: &SingleBirthTableau, levels: &[usize], rule: &VerdictRule) -> Result<ExplicitVerdict> {
    if let Some(row) = t.overflow_row {
        return Ok(ExplicitVerdict {
            verdict: BoundednessVerdict::inconclusive(),
            samples: Vec::new(),
            estimate: None,
            note: Some(format!("tableau overflowed at row {row}")),
        });
    }
    let samples = levels.iter().filter(|&&n| n <= t.depth).map(|&n| (n, t.d_sup(n))).collect();
    verdict_on(samples, rule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub label: String,
    pub d: f64,
    pub verdict: BoundednessVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongExplicit {
    /// Verdict on T_N = max_k (S_{k-1} d_sup(N) − D_{k-1}), a monotone lower-bound sequence.
    pub verdict: BoundednessVerdict,
    pub samples: Vec<(usize, f64)>,
    pub d_hat: f64,
    /// S_k d̂ − D_k for k = 0..=horizon.
    pub partial_sums: Vec<f64>,
    /// Verdicts of the running maximum of S_k d − D_k at d below, at and above d̂.
    pub sensitivity: Vec<SensitivityPoint>,
    pub robust: bool,
}

pub const PARTIAL_SUM_HORIZON: usize = 1024;

/// Strong-ergodicity functional, given a Converged verdict on d.
pub fn strong_explicit(t: &SingleBirthTableau, d_verdict: &ExplicitVerdict, rule: &VerdictRule) -> Result<StrongExplicit> {
    strong_explicit_at(t, d_verdict, &t.sample_levels(), rule)
}

pub fn strong_explicit_at(
    t: &SingleBirthTableau,
    d_verdict: &ExplicitVerdict,
    levels: &[usize],
    rule: &VerdictRule,
) -> Result<StrongExplicit> {
    let d_hat = match (&d_verdict.verdict.state, d_verdict.estimate) {
        (VerdictState::Converged { .. }, Some(e)) => e,
        (s, _) => return Err(SbError::NonFiniteD(format!("{s:?}"))),
    };
    let levels: Vec<usize> = levels.iter().copied().filter(|&n| n <= t.depth).collect();
    let samples: Vec<(usize, f64)> = levels.iter().map(|&n| (n, t.truncated_max(n))).collect();
    let lv: Vec<usize> = samples.iter().map(|s| s.0).collect();
    let vals: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let verdict = boundedness_verdict_at(&lv, &vals, rule)?;
    let horizon = t.depth.min(PARTIAL_SUM_HORIZON);
    let partial_sums = (0..=horizon).map(|k| t.strong_partial(k, d_hat)).collect();
    let d_lo = t.d_sup(t.depth);
    let d_hi = d_hat + (d_hat - d_lo).abs();
    let mut sensitivity = Vec::new();
    for (label, d) in [("lower", d_lo), ("estimate", d_hat), ("upper", d_hi)] {
        let vals: Vec<f64> = lv.iter().map(|&n| t.strong_max(n, d)).collect();
        let v = boundedness_verdict_at(&lv, &vals, rule)?;
        sensitivity.push(SensitivityPoint { label: label.to_string(), d, verdict: v });
    }
    let robust = sensitivity.iter().all(|p| p.verdict.state.same_kind(&verdict.state));
    Ok(StrongExplicit { verdict, samples, d_hat, partial_sums, sensitivity, robust })
}

/// Divergence of Σ F_n^(0): Diverging means recurrent, Converged transient.
pub fn recurrence_explicit(t: &SingleBirthTableau, rule: &VerdictRule) -> Result<ExplicitVerdict> {
    let samples = t.sample_levels().into_iter().map(|n| (n, t.partial_f(n))).collect();
    verdict_on(samples, rule)
}

/// Partial sums of α_i/i for a catastrophe chain.
pub fn catastrophe_recurrence(alpha: &dyn Fn(usize) -> f64, k: usize, rule: &VerdictRule) -> Result<ExplicitVerdict> {
    if k == 0 {
        return Err(SbError::ZeroDepth);
    }
    let levels = sample_levels(k);
    let mut samples = Vec::with_capacity(levels.len());
    let mut acc = 0.0;
    let mut next = 0;
    for i in 1..=k {
        acc += alpha(i) / i as f64;
        if levels[next] == i {
            samples.push((i, acc));
            next += 1;
        }
    }
    verdict_on(samples, rule)
}

/// inf_{1≤i≤K} q_{i0}: a positive value together with recurrence gives strong ergodicity.
pub fn uniform_catastrophe_bound(sb: &dyn SingleBirthRates, k: usize) -> f64 {
    (1..=k)
        .map(|i| sb.below(i).iter().filter(|e| e.0 == 0).map(|e| e.1).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    /// x_1..x_N from the recurrence.
    pub x: Vec<f64>,
    /// x_1..x_N from the direct solve.
    pub direct: Vec<f64>,
    /// ‖x − direct‖∞ / ‖direct‖∞
    pub max_rel_diff: f64,
}

pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// x_k^(N) = x_1 S_{k-1} − D_{k-1}, with x_1 from the direct solve of the
/// truncated system, compared against the full direct solution.
pub fn truncated_closed_form(gen: &dyn Generator, n: usize) -> Result<ClosedForm> {
    let sb = gen.single_birth().ok_or(SbError::NotSingleBirth)?;
    if n == 0 {
        return Err(SbError::ZeroDepth);
    }
    let t = build_tableau_with(sb, n, TableauMode::Streaming)?;
    let sys = build_truncated_system(gen, &TargetSet::root(), n, SystemSource::Ordinary)?;
    let direct = solve_direct(&sys.op)?.x;
    if let Some(p) = direct.iter().position(|v| !(*v > 0.0)) {
        return Err(SbError::NotPositive(p + 1));
    }
    let x1 = direct[0];
    let x: Vec<f64> = (1..=n).map(|k| x1 * t.partial_f(k - 1) - t.partial_d(k - 1)).collect();
    let norm = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = x.iter().zip(&direct).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let max_rel_diff = diff / norm;
    if !(max_rel_diff <= CLOSED_FORM_TOL) {
        return Err(SbError::Mismatch(max_rel_diff));
    }
    Ok(ClosedForm { x, direct, max_rel_diff })
}

/// x'_i = (e1 + ε) S_{i-1} − D_{i-1} for i = 1..=K, where e1 estimates E_1 σ_0.
/// For ε > 0 this is a solution of the one-step equations that is not minimal
/// and grows like ε S_{i-1}.
pub fn unbounded_solution_fixture(gen: &dyn Generator, eps: f64, k: usize, e1: f64, rule: &VerdictRule) -> Result<Vec<f64>> {
    let sb = gen.single_birth().ok_or(SbError::NotSingleBirth)?;
    let t = build_tableau(sb, k)?;
    if recurrence_explicit(&t, rule)?.verdict.state.is_converged() {
        return Err(SbError::Transient);
    }
    Ok((1..=k).map(|i| (e1 + eps) * t.partial_f(i - 1) - t.partial_d(i - 1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Bd2;
    impl SingleBirthRates for Bd2 {
        fn up(&self, n: usize) -> f64 {
            if n == 0 { 1.0 } else { (n * n) as f64 }
        }
        fn below(&self, n: usize) -> Vec<(usize, f64)> {
            if n == 0 { vec![] } else { vec![(n - 1, (n * n) as f64)] }
        }
    }

    struct CatConst;
    impl SingleBirthRates for CatConst {
        fn up(&self, n: usize) -> f64 {
            (n + 1) as f64
        }
        fn below(&self, n: usize) -> Vec<(usize, f64)> {
            if n == 0 { vec![] } else { vec![(0, 1.0)] }
        }
    }

    #[test]
    fn birth_death_square_rates() {
        let t = build_tableau(&Bd2, 10).unwrap();
        for n in 0..=10 {
            assert!((t.f0(n) - 1.0).abs() < 1e-15);
            assert_eq!(t.full_entry(n, n), Some(1.0));
        }
        assert!((t.d(3) - 49.0 / 36.0).abs() < 1e-15);
        assert!(t.cross_check.max_rel_diff < 1e-12);
    }

    #[test]
    fn catastrophe_halves() {
        let t = build_tableau(&CatConst, 50).unwrap();
        for n in 1..=50 {
            assert!((t.f0(n) - 0.5).abs() < 1e-15);
            assert!((t.d(n) - 0.5).abs() < 1e-15);
        }
        let k = 50.0;
        assert!((t.d_sup(50) - k / (k + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn streaming_matches_full() {
        let a = build_tableau_with(&Bd2, 300, TableauMode::Full).unwrap();
        let b = build_tableau_with(&Bd2, 300, TableauMode::Streaming).unwrap();
        for n in 0..=300 {
            assert_eq!(a.d(n), b.d(n));
        }
        assert!(b.full_entry(3, 1).is_none());
    }

    #[test]
    fn sample_levels_shape() {
        assert_eq!(sample_levels(100), vec![16, 32, 64, 100]);
        assert_eq!(sample_levels(8), vec![1, 2, 4, 8]);
    }
}
