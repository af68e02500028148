//! Level-reduction checks for the multi-dimensional models.
//!
//! For test functions that depend on a state only through its level
//! |x| = i, the multi-dimensional inequality collapses to a one-dimensional
//! family indexed by i (and, for the Brussel model, by ℓ = Σ_u x₁(u)). These
//! checkers evaluate the reduced families row by row for every n ≤ n_max and
//! i ≤ i_max, and read the divergence of the witness statistic in n.

use crate::classifier::{boundedness_verdict_at, BoundednessVerdict, VerdictRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelError {
    #[error("family {family} requires gamma <= {cap}, got {gamma}")]
    GammaAboveCap { family: String, cap: f64, gamma: f64 },
    #[error("n_max and i_max must be positive")]
    EmptyRange,
    #[error("parameters must be positive")]
    BadParameter,
}

/// Relative slack for equality rows.
pub const LEVEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectCheck {
    pub sites: usize,
    pub gamma: f64,
    pub max_level: usize,
    pub states_checked: u64,
    pub violations: u64,
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCheckReport {
    pub family: String,
    pub n_max: usize,
    pub i_max: usize,
    pub rows_checked: u64,
    pub violations: u64,
    /// Largest lhs − rhs over all rows (negative means slack everywhere).
    pub max_excess: f64,
    /// (n, i) of the largest excess.
    pub worst: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectCheck>,
    /// (n, witness statistic).
    pub statistic: Vec<(usize, f64)>,
    pub verdict: BoundednessVerdict,
    pub passes: bool,
}

/// n = 1, 2, 4, … up to n_max, plus n_max.
fn stat_levels(n_max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..usize::BITS).map(|k| 1usize << k).take_while(|&n| n <= n_max).collect();
    if v.last() != Some(&n_max) {
        v.push(n_max);
    }
    v
}

#[derive(Debug, Clone, Copy)]
struct RowStats {
    rows: u64,
    violations: u64,
    max_excess: f64,
    worst: Option<(usize, usize)>,
}

impl RowStats {
    fn new() -> Self {
        RowStats { rows: 0, violations: 0, max_excess: f64::NEG_INFINITY, worst: None }
    }

    fn record(&mut self, n: usize, i: usize, excess: f64, scale: f64) {
        self.rows += 1;
        if excess > LEVEL_TOL * scale {
            self.violations += 1;
        }
        if excess > self.max_excess {
            self.max_excess = excess;
            self.worst = Some((n, i));
        }
    }

    /// Ordered merge: ties keep the earlier (n, i).
    fn merge(mut self, o: RowStats) -> Self {
        self.rows += o.rows;
        self.violations += o.violations;
        if o.max_excess > self.max_excess {
            self.max_excess = o.max_excess;
            self.worst = o.worst;
        }
        self
    }
}

fn run_rows(n_max: usize, per_n: impl Fn(usize) -> RowStats + Sync + Send) -> RowStats {
    let parts: Vec<RowStats> = (1..=n_max).into_par_iter().map(per_n).collect();
    parts.into_iter().fold(RowStats::new(), RowStats::merge)
}

fn finish(
    family: String,
    n_max: usize,
    i_max: usize,
    stats: RowStats,
    statistic: Vec<(usize, f64)>,
    direct: Option<DirectCheck>,
) -> LevelCheckReport {
    let levels: Vec<usize> = statistic.iter().map(|s| s.0).collect();
    let values: Vec<f64> = statistic.iter().map(|s| s.1).collect();
    let verdict = boundedness_verdict_at(&levels, &values, &VerdictRule::default())
        .unwrap_or_else(|_| BoundednessVerdict::inconclusive());
    let direct_ok = direct.as_ref().is_none_or(|d| d.violations == 0);
    let passes = stats.violations == 0 && direct_ok && verdict.state.is_diverging();
    LevelCheckReport {
        family,
        n_max,
        i_max,
        rows_checked: stats.rows,
        violations: stats.violations,
        max_excess: stats.max_excess,
        worst: stats.worst,
        direct,
        statistic,
        verdict,
        passes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrusselFamily {
    /// f_i = log(i+1)/λ₄ for i ≤ n, log(n+1)/λ₄ beyond.
    LogLevel,
    /// d_i = 1/(λ₄(i+1)) for i ≤ n, −1/(λ₁ã(n+1)) at n+1, −1/(λ₁ã) beyond.
    Increment,
    /// f ≡ 0.
    Zero,
}

/// Rates entering the reduced Brussel inequality: total birth λ₁ã and the
/// per-particle death rate λ₄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrusselRates {
    pub birth: f64,
    pub death: f64,
}

/// (λ₁ã + λ₄ℓ) f_i ≤ λ₁ã f_{i+1} + λ₄ℓ f_{i−1} + 1 with f_0 = 0, for
/// i ≤ i_max, n ≤ n_max and ℓ over [0, i]. The inequality is affine in ℓ,
/// so the endpoints ℓ = 0 and ℓ = i are the binding rows.
pub fn brussel_level_inequality_check(
    rates: BrusselRates,
    family: BrusselFamily,
    n_max: usize,
    i_max: usize,
) -> Result<LevelCheckReport, LevelError> {
    if n_max == 0 || i_max == 0 {
        return Err(LevelError::EmptyRange);
    }
    let (a, l4) = (rates.birth, rates.death);
    if !(a > 0.0 && l4 > 0.0 && a.is_finite() && l4.is_finite()) {
        return Err(LevelError::BadParameter);
    }
    let logs: Vec<f64> = (0..=i_max + 2).map(|k| ((k + 1) as f64).ln()).collect();
    let stats = run_rows(n_max, |n| {
        let mut st = RowStats::new();
        match family {
            BrusselFamily::LogLevel | BrusselFamily::Zero => {
                let f = |i: usize| -> f64 {
                    match family {
                        BrusselFamily::Zero => 0.0,
                        _ if i == 0 => 0.0,
                        _ => logs[i.min(n)] / l4,
                    }
                };
                for i in 1..=i_max {
                    let (fm, f0, fp) = (f(i - 1), f(i), f(i + 1));
                    for l in [0.0, i as f64] {
                        let lhs = (a + l4 * l) * f0;
                        let rhs = a * fp + l4 * l * fm + 1.0;
                        st.record(n, i, lhs - rhs, lhs.abs() + rhs.abs());
                    }
                }
            }
            BrusselFamily::Increment => {
                let d = |i: usize| -> f64 {
                    if i <= n {
                        1.0 / (l4 * (i + 1) as f64)
                    } else if i == n + 1 {
                        -1.0 / (a * (n + 1) as f64)
                    } else {
                        -1.0 / a
                    }
                };
                for i in 1..=i_max {
                    let (di, dn) = (d(i), d(i + 1));
                    for l in [0.0, i as f64] {
                        let lhs = l4 * l * di - a * dn;
                        st.record(n, i, lhs - 1.0, (l4 * l * di).abs() + (a * dn).abs() + 1.0);
                    }
                }
            }
        }
        st
    });
    let statistic = stat_levels(n_max)
        .into_iter()
        .map(|n| {
            let s = match family {
                BrusselFamily::LogLevel => logs[n] / l4,
                BrusselFamily::Increment => (1..=n).map(|k| 1.0 / (l4 * (k + 1) as f64)).sum(),
                BrusselFamily::Zero => 0.0,
            };
            (n, s)
        })
        .collect();
    let name = match family {
        BrusselFamily::LogLevel => "brussel_log_level",
        BrusselFamily::Increment => "brussel_increment",
        BrusselFamily::Zero => "brussel_zero",
    };
    Ok(finish(name.into(), n_max, i_max, stats, statistic, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiGammaFamily {
    /// d_i = i^{−(1+1/i)} for i ≤ n, i^{−(1+1/(n+1))} beyond; needs γ ≤ 2.
    PowerDecay,
    /// d_i = 1/((i+9) log(i+9)) for i ≤ n, then decreasing by 1/k²; needs γ ≤ 2.
    LogShift,
    /// d_k = n − H_{k−1} with y_θ = n + 1/|S|; needs γ ≤ 1.
    Harmonic,
}

impl MultiGammaFamily {
    /// Exponent c of the reduced inequality d_i ≤ d_{i+1} + 1/i^c.
    pub fn cap(&self) -> f64 {
        match self {
            MultiGammaFamily::PowerDecay | MultiGammaFamily::LogShift => 2.0,
            MultiGammaFamily::Harmonic => 1.0,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            MultiGammaFamily::PowerDecay => "multi_gamma_power_decay",
            MultiGammaFamily::LogShift => "multi_gamma_log_shift",
            MultiGammaFamily::Harmonic => "multi_gamma_harmonic",
        }
    }
}

fn power_decay_d(n: usize, i: usize) -> f64 {
    let x = i as f64;
    if i <= n {
        x.powf(-(1.0 + 1.0 / x))
    } else {
        x.powf(-(1.0 + 1.0 / (n + 1) as f64))
    }
}

fn log_shift_base(i: usize) -> f64 {
    let x = (i + 9) as f64;
    1.0 / (x * x.ln())
}

/// d_1..=d_len of the log-shift family at n.
fn log_shift_d(n: usize, len: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(len + 1);
    d.push(f64::NAN);
    let c = log_shift_base(n);
    let mut acc = 0.0;
    for i in 1..=len {
        if i <= n {
            d.push(log_shift_base(i));
        } else {
            acc += 1.0 / ((i - 1) as f64).powi(2);
            d.push(c - acc);
        }
    }
    d
}

/// Harmonic numbers H_0..=H_len.
fn harmonic_numbers(len: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(len + 1);
    let mut acc = 0.0;
    h.push(0.0);
    for k in 1..=len {
        acc += 1.0 / k as f64;
        h.push(acc);
    }
    h
}

/// Hurwitz zeta ζ(s, q) = Σ_{k≥0} (q+k)^{−s} for s > 1, q > 0, by
/// Euler–Maclaurin summation after 16 explicit terms.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const M: usize = 16;
    const B: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];
    let mut sum: f64 = (0..M).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + M as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · a^{−s−2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in B.iter().enumerate() {
        let k = 2 * (j + 1);
        sum += b / fact * rising * a.powf(-s - k as f64 + 1.0);
        rising *= (s + k as f64 - 1.0) * (s + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
    }
    sum
}

/// Largest Σ_u x(u)^γ (over sites with x(u) ≥ 1) on level i with `sites` sites.
fn max_rate_on_level(i: usize, sites: usize, gamma: f64) -> (f64, u64) {
    fn walk(rem: usize, sites_left: usize, gamma: f64, acc: f64, best: &mut f64, count: &mut u64) {
        if sites_left == 1 {
            let r = acc + if rem >= 1 { (rem as f64).powf(gamma) } else { 0.0 };
            *best = best.max(r);
            *count += 1;
            return;
        }
        for k in 0..=rem {
            let add = if k >= 1 { (k as f64).powf(gamma) } else { 0.0 };
            walk(rem - k, sites_left - 1, gamma, acc + add, best, count);
        }
    }
    let mut best = 0.0;
    let mut count = 0;
    walk(i, sites, gamma, 0.0, &mut best, &mut count);
    (best, count)
}

/// Checks the reduced multi-γ families and, on levels up to `direct_levels`,
/// the unreduced rows d_i ≤ d_{i+1} + 1/Σ_u x(u)^γ on every state of the
/// level for the model with `sites` sites.
pub fn multi_gamma_level_check(
    gamma: f64,
    family: MultiGammaFamily,
    n_max: usize,
    i_max: usize,
    sites: usize,
    direct_levels: usize,
) -> Result<LevelCheckReport, LevelError> {
    if n_max == 0 || i_max == 0 || sites == 0 {
        return Err(LevelError::EmptyRange);
    }
    if !(gamma <= family.cap()) {
        return Err(LevelError::GammaAboveCap { family: family.name().into(), cap: family.cap(), gamma });
    }
    let c = family.cap();
    let harm = harmonic_numbers(i_max + 1);
    let d_vec = |n: usize, len: usize| -> Vec<f64> {
        match family {
            MultiGammaFamily::PowerDecay => {
                std::iter::once(f64::NAN).chain((1..=len).map(|i| power_decay_d(n, i))).collect()
            }
            MultiGammaFamily::LogShift => log_shift_d(n, len),
            MultiGammaFamily::Harmonic => {
                std::iter::once(f64::NAN).chain((1..=len).map(|k| n as f64 - harm[k - 1])).collect()
            }
        }
    };
    let stats = run_rows(n_max, |n| {
        let mut st = RowStats::new();
        let d = d_vec(n, i_max + 1);
        if family == MultiGammaFamily::Harmonic {
            // y_θ ≤ y_1 + 1/|S| with y_θ = n + 1/|S|, y_1 = d_1
            let y_theta = n as f64 + 1.0 / sites as f64;
            let rhs = d[1] + 1.0 / sites as f64;
            st.record(n, 0, y_theta - rhs, y_theta.abs() + rhs.abs());
        }
        for i in 1..=i_max {
            let bound = (i as f64).powf(-c);
            // harmonic terms are differences of n and H_k; their size sets the rounding scale
            let mag = if family == MultiGammaFamily::Harmonic { 2.0 * n as f64 } else { 0.0 };
            st.record(n, i, d[i] - d[i + 1] - bound, d[i].abs() + d[i + 1].abs() + bound + mag);
        }
        st
    });
    let direct = if direct_levels > 0 {
        let top = direct_levels.min(i_max);
        let mut dc = DirectCheck { sites, gamma, max_level: top, states_checked: 0, violations: 0, max_excess: f64::NEG_INFINITY };
        let per_level: Vec<(f64, u64)> = (1..=top).map(|i| max_rate_on_level(i, sites, gamma)).collect();
        for n in stat_levels(n_max) {
            let d = d_vec(n, top + 1);
            for i in 1..=top {
                let (r, count) = per_level[i - 1];
                let bound = 1.0 / r;
                let excess = d[i] - d[i + 1] - bound;
                dc.states_checked += count;
                if excess > LEVEL_TOL * (d[i].abs() + d[i + 1].abs() + bound) {
                    dc.violations += count;
                }
                dc.max_excess = dc.max_excess.max(excess);
            }
        }
        Some(dc)
    } else {
        None
    };
    let statistic = stat_levels(n_max)
        .into_iter()
        .map(|n| {
            let s = match family {
                MultiGammaFamily::PowerDecay => {
                    let head: f64 = (1..=n).map(|i| power_decay_d(n, i)).sum();
                    head + hurwitz_zeta(1.0 + 1.0 / (n + 1) as f64, (n + 1) as f64)
                }
                MultiGammaFamily::LogShift => {
                    // partial sums rise while d_i > 0; d turns negative at a finite index
                    let mut sum = 0.0;
                    let mut acc = 0.0;
                    let c_n = log_shift_base(n);
                    let mut i = 1;
                    loop {
                        let di = if i <= n {
                            log_shift_base(i)
                        } else {
                            acc += 1.0 / ((i - 1) as f64).powi(2);
                            c_n - acc
                        };
                        if di <= 0.0 {
                            break;
                        }
                        sum += di;
                        i += 1;
                    }
                    sum
                }
                MultiGammaFamily::Harmonic => n as f64 + 1.0 / sites as f64,
            };
            (n, s)
        })
        .collect();
    Ok(finish(family.name().into(), n_max, i_max, stats, statistic, direct))
}
