//! Return-time moments and exponential moments from truncation sweeps.
//!
//! Every quantity here is the minimal nonnegative solution of a truncated
//! system, so each sweep is a monotone lower-bound sequence converging to the
//! countable-state value (possibly +∞). Values on H are obtained from the
//! interior solution by one application of the H rows.

use crate::chain::{
    build_truncated_system, effective_level, level_of, ChainError, Generator, SystemSource, TargetSet, TruncatedSystem,
};
use crate::classifier::{boundedness_verdict_at, BoundednessVerdict, VerdictRule};
use crate::solver::{solve_direct, SolverError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("bad schedule: {0}")]
    BadSchedule(String),
    #[error("rate {lambda} outside (0, {lambda_prime}]")]
    LambdaOutOfRange { lambda: f64, lambda_prime: f64 },
    #[error("infimum of total rates is zero on the enumerated prefix")]
    ZeroInfRate,
    #[error("moment order must be at least 1")]
    ZeroOrder,
}

pub type Result<T> = std::result::Result<T, MomentError>;

/// Relative slack allowed in monotonicity checks.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// N = 2^a, …, 2^b.
pub fn pow2_schedule(a: u32, b: u32) -> Vec<usize> {
    (a..=b).map(|k| 1usize << k).collect()
}

pub fn default_schedule() -> Vec<usize> {
    pow2_schedule(4, 17)
}

/// Parses "pow2:a..b" or a comma list of levels.
pub fn parse_schedule(s: &str) -> Result<Vec<usize>> {
    let bad = || MomentError::BadSchedule(s.to_string());
    let v = if let Some(rest) = s.strip_prefix("pow2:") {
        let (a, b) = rest.split_once("..").ok_or_else(bad)?;
        let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b || b > 40 {
            return Err(bad());
        }
        pow2_schedule(a, b)
    } else {
        s.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?
    };
    validate_schedule(&v)?;
    Ok(v)
}

pub fn validate_schedule(v: &[usize]) -> Result<()> {
    if v.is_empty() {
        return Err(MomentError::BadSchedule("empty".into()));
    }
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MomentError::BadSchedule("levels must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SweepKind {
    Ordinary,
    Ladder { order: usize },
    Exponential { lambda: f64 },
}

/// Moment table of one order at one truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub order: usize,
    pub level: usize,
    /// Unknown states (outside H), increasing.
    pub states: Vec<usize>,
    pub values: Vec<f64>,
    pub h_values: Vec<(usize, f64)>,
}

impl MomentTable {
    /// x^(0) ≡ 1.
    pub fn zeroth(gen: &dyn Generator, h: &TargetSet, n: usize) -> Self {
        let n = effective_level(gen, n);
        let states: Vec<usize> = (0..=n).filter(|i| !h.contains(*i)).collect();
        MomentTable {
            order: 0,
            level: n,
            values: vec![1.0; states.len()],
            states,
            h_values: h.members().iter().map(|&s| (s, 1.0)).collect(),
        }
    }

    pub fn value(&self, state: usize) -> Option<f64> {
        if let Ok(p) = self.states.binary_search(&state) {
            return Some(self.values[p]);
        }
        self.h_values.iter().find(|e| e.0 == state).map(|e| e.1)
    }

    /// Values indexed by state 0..=level, H included.
    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.level + 1];
        for (s, x) in self.states.iter().zip(&self.values) {
            v[*s] = *x;
        }
        for &(s, x) in &self.h_values {
            v[s] = x;
        }
        v
    }

    pub fn max_h(&self) -> f64 {
        self.h_values.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_interior(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Solves a truncated system; an infinite minimal solution yields +∞ everywhere.
pub fn solve_truncated(sys: &TruncatedSystem) -> Result<(Vec<f64>, Vec<(usize, f64)>)> {
    match solve_direct(&sys.op) {
        Ok(s) => {
            let h = sys.h_values(&s.x);
            Ok((s.x, h))
        }
        Err(SolverError::Infinite { .. }) => Ok((
            vec![f64::INFINITY; sys.len()],
            sys.h_rows.iter().map(|r| (r.state, f64::INFINITY)).collect(),
        )),
        Err(e) => Err(e.into()),
    }
}

fn table_from(sys: &TruncatedSystem, order: usize) -> Result<MomentTable> {
    let (values, h_values) = solve_truncated(sys)?;
    Ok(MomentTable { order, level: sys.level, states: sys.unknowns.clone(), values, h_values })
}

/// Tables for orders 1..=l_max at level N; order ℓ+1 uses order ℓ as its source.
pub fn moment_ladder(gen: &dyn Generator, h: &TargetSet, l_max: usize, n: usize) -> Result<Vec<MomentTable>> {
    if l_max == 0 {
        return Err(MomentError::ZeroOrder);
    }
    let mut out: Vec<MomentTable> = Vec::with_capacity(l_max);
    let first = build_truncated_system(gen, h, n, SystemSource::Ordinary)?;
    out.push(table_from(&first, 1)?);
    for order in 2..=l_max {
        let prev = out.last().unwrap().dense();
        let sys = build_truncated_system(gen, h, n, SystemSource::Ladder { order, previous: &prev })?;
        out.push(table_from(&sys, order)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub level: usize,
    pub h_values: Vec<(usize, f64)>,
    /// max_{h∈H} x_h^(N)
    pub x_h: f64,
    /// max interior value M_N
    pub m_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSweep {
    pub kind: SweepKind,
    pub levels: Vec<SweepLevel>,
    pub failure: Option<String>,
    /// (level |x|, max value on that level) of the deepest truncation.
    #[serde(skip)]
    pub profile: Vec<(usize, f64)>,
}

impl MomentSweep {
    pub fn level_list(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.level).collect()
    }

    pub fn h_sequence(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.x_h).collect()
    }

    pub fn m_sequence(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.m_n).collect()
    }

    pub fn h_verdict(&self, rule: &VerdictRule) -> BoundednessVerdict {
        self.verdict_of(&self.h_sequence(), rule)
    }

    pub fn m_verdict(&self, rule: &VerdictRule) -> BoundednessVerdict {
        self.verdict_of(&self.m_sequence(), rule)
    }

    fn verdict_of(&self, values: &[f64], rule: &VerdictRule) -> BoundednessVerdict {
        if self.failure.is_some() {
            return BoundednessVerdict::inconclusive();
        }
        boundedness_verdict_at(&self.level_list(), values, rule).unwrap_or_else(|_| BoundednessVerdict::inconclusive())
    }

    /// Both sequences nondecreasing within the slack.
    pub fn is_monotone(&self) -> bool {
        let ok = |s: Vec<f64>| s.windows(2).all(|w| w[0] <= w[1] + MONOTONE_SLACK * (1.0 + w[1].abs()));
        ok(self.h_sequence()) && ok(self.m_sequence())
    }
}

fn sweep_level(table: &MomentTable) -> SweepLevel {
    SweepLevel { level: table.level, h_values: table.h_values.clone(), x_h: table.max_h(), m_n: table.max_interior() }
}

/// Largest value on each lattice level of a table.
pub fn level_profile(gen: &dyn Generator, table: &MomentTable) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (&i, &v) in table.states.iter().zip(&table.values) {
        let level = level_of(gen, i);
        match out.last_mut() {
            Some(last) if last.0 == level => last.1 = last.1.max(v),
            _ => out.push((level, v)),
        }
    }
    out
}

fn finish(kind: SweepKind, results: Vec<Result<SweepLevel>>) -> MomentSweep {
    let mut levels = Vec::with_capacity(results.len());
    let mut failure = None;
    for r in results {
        match r {
            Ok(l) => levels.push(l),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    let mut sweep = MomentSweep { kind, levels, failure, profile: Vec::new() };
    if sweep.failure.is_none() && !sweep.is_monotone() {
        sweep.failure = Some("sweep is not monotone in N".into());
    }
    sweep
}

/// Independent solves at every level of the schedule.
pub fn truncation_sweep(gen: &dyn Generator, h: &TargetSet, kind: SweepKind, schedule: &[usize]) -> MomentSweep {
    let results: Vec<Result<SweepLevel>> = schedule
        .par_iter()
        .map(|&n| {
            let table = match kind {
                SweepKind::Ordinary => table_from(&build_truncated_system(gen, h, n, SystemSource::Ordinary)?, 1)?,
                SweepKind::Ladder { order } => moment_ladder(gen, h, order, n)?.pop().unwrap(),
                SweepKind::Exponential { lambda } => {
                    table_from(&build_truncated_system(gen, h, n, SystemSource::Exponential { lambda })?, 0)?
                }
            };
            Ok(sweep_level(&table))
        })
        .collect();
    finish(kind, results)
}

/// Sweeps for every order 1..=l_max from one ladder per level.
pub fn ladder_sweeps(gen: &dyn Generator, h: &TargetSet, l_max: usize, schedule: &[usize]) -> Vec<MomentSweep> {
    let per_level: Vec<Result<Vec<MomentTable>>> =
        schedule.par_iter().map(|&n| moment_ladder(gen, h, l_max.max(1), n)).collect();
    (1..=l_max)
        .map(|order| {
            let results = per_level
                .iter()
                .map(|r| match r {
                    Ok(tables) => Ok(sweep_level(&tables[order - 1])),
                    Err(e) => Err(e.clone()),
                })
                .collect();
            let mut sweep = finish(SweepKind::Ladder { order }, results);
            if let Some(Ok(tables)) = per_level.last() {
                sweep.profile = level_profile(gen, &tables[order - 1]);
            }
            sweep
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    /// ½ inf q_i over the prefix.
    pub lambda_prime: f64,
    pub inf_rate: f64,
    /// False when the infimum keeps dropping in the upper half of the prefix.
    pub certified: bool,
}

pub fn rate_bound(gen: &dyn Generator, n_max: usize) -> RateBound {
    let n = effective_level(gen, n_max);
    let rates: Vec<f64> = (0..=n).into_par_iter().map(|i| gen.total_rate(i)).collect();
    let inf = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let lower_half = rates[..=n / 2].iter().copied().fold(f64::INFINITY, f64::min);
    RateBound { lambda_prime: 0.5 * inf, inf_rate: inf, certified: inf >= lower_half }
}

/// λ′·2^{-k}, k = 0..count.
pub fn default_grid(lambda_prime: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lambda_prime * 0.5f64.powi(k as i32)).collect()
}

pub const DEFAULT_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPoint {
    pub lambda: f64,
    pub sweep: MomentSweep,
    pub verdict: BoundednessVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLimitCheck {
    pub level: usize,
    /// Truncated E_h σ_H.
    pub ordinary: f64,
    pub at_smallest: f64,
    pub at_half_smallest: f64,
    /// Linear extrapolation to λ = 0.
    pub extrapolated: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentCurve {
    pub bound: RateBound,
    pub points: Vec<ExpPoint>,
    pub zero_limit: Vec<ZeroLimitCheck>,
}

impl ExpMomentCurve {
    /// Largest λ whose sweep Converged.
    pub fn converged_lambda(&self) -> Option<f64> {
        self.points.iter().filter(|p| p.verdict.state.is_converged()).map(|p| p.lambda).fold(None, |m, l| {
            Some(m.map_or(l, |x: f64| x.max(l)))
        })
    }
}

/// Exponential-moment sweeps over a λ grid in (0, λ′].
pub fn exp_moment_scan(
    gen: &dyn Generator,
    h: &TargetSet,
    grid: Option<&[f64]>,
    schedule: &[usize],
    rule: &VerdictRule,
) -> Result<ExpMomentCurve> {
    // Clamping to a finite state space may repeat levels; order still matters.
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] > w[1]) {
        return Err(MomentError::BadSchedule("levels must be nonempty and nondecreasing".into()));
    }
    let bound = rate_bound(gen, *schedule.last().unwrap());
    if !(bound.lambda_prime > 0.0) {
        return Err(MomentError::ZeroInfRate);
    }
    let grid: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => default_grid(bound.lambda_prime, DEFAULT_GRID_POINTS),
    };
    for &l in &grid {
        if !(l > 0.0 && l <= bound.lambda_prime) {
            return Err(MomentError::LambdaOutOfRange { lambda: l, lambda_prime: bound.lambda_prime });
        }
    }
    let points: Vec<ExpPoint> = grid
        .par_iter()
        .map(|&lambda| {
            let sweep = truncation_sweep(gen, h, SweepKind::Exponential { lambda }, schedule);
            let verdict = sweep.h_verdict(rule);
            ExpPoint { lambda, sweep, verdict }
        })
        .collect();
    let smallest = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let ordinary = truncation_sweep(gen, h, SweepKind::Ordinary, schedule);
    let small = truncation_sweep(gen, h, SweepKind::Exponential { lambda: smallest }, schedule);
    let half = truncation_sweep(gen, h, SweepKind::Exponential { lambda: smallest / 2.0 }, schedule);
    let zero_limit = ordinary
        .levels
        .iter()
        .zip(&small.levels)
        .zip(&half.levels)
        .map(|((o, s), hf)| {
            let extrapolated = 2.0 * hf.x_h - s.x_h;
            let gap = (s.x_h - o.x_h).abs();
            let consistent = o.x_h <= hf.x_h * (1.0 + MONOTONE_SLACK)
                && hf.x_h <= s.x_h * (1.0 + MONOTONE_SLACK)
                && (extrapolated - o.x_h).abs() <= (1e-6 * (1.0 + o.x_h)).max(0.5 * gap);
            ZeroLimitCheck {
                level: o.level,
                ordinary: o.x_h,
                at_smallest: s.x_h,
                at_half_smallest: hf.x_h,
                extrapolated,
                consistent,
            }
        })
        .collect();
    Ok(ExpMomentCurve { bound, points, zero_limit })
}
