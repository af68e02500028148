//! Witness sequences for negative verdicts: generation from truncated minimal
//! solutions and verification against the inverse-criteria inequalities.
//!
//! A witness is a family y^(n) of functions on the state space. Each term is
//! stored as an explicit support plus an [`Extent`] saying what happens past
//! the largest listed state. Verification evaluates
//!
//! ```text
//! y_i ≤ c_i Σ_{j∉H} Π_ij y_j + s_i
//! ```
//!
//! on an explicitly recorded region of states and reads the divergence of the
//! sup statistic with the classifier's window rule.

use crate::chain::{
    build_truncated_system, effective_level, embedded_row, last_index_of_level, ChainError, ChainKind, Generator,
    SystemSource, TargetSet,
};
use crate::classifier::{boundedness_verdict, boundedness_verdict_at, BoundednessVerdict, VerdictRule, VerdictState};
use crate::moments::{moment_ladder, rate_bound, solve_truncated, MomentError, MomentTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("non_exponential witness needs one rate per term ({terms} terms, {lambdas} rates)")]
    MissingLambdas { terms: usize, lambdas: usize },
    #[error("non_algebraic witness with ell = {ell} needs a moment table of order {ell}")]
    MissingMomentTable { ell: usize },
    #[error("{0} witnesses are not defined for discrete chains")]
    UnsupportedKind(WitnessKind),
    #[error("witness has no terms")]
    Empty,
    #[error("term {term}: {reason}")]
    InvalidTerm { term: usize, reason: String },
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("schedule has {have} levels, {need} terms requested")]
    ShortSchedule { have: usize, need: usize },
    #[error("infimum of total rates is zero on the first {0} states")]
    ZeroInfRate(usize),
    #[error("term n = {n}: x_H at rate {cap} is still growing at level {level}")]
    BudgetExhausted { n: usize, level: usize, cap: f64 },
    #[error("truncated solution at level {level} is infinite")]
    InfiniteTerm { level: usize },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error("witness file: {0}")]
    File(String),
}

pub type Result<T> = std::result::Result<T, WitnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    NonErgodic,
    NonStrong,
    /// E σ_H^{ell+1} = ∞ given finite E σ_H^ell.
    NonAlgebraic,
    NonExponential,
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WitnessKind::NonErgodic => "non_ergodic",
            WitnessKind::NonStrong => "non_strong",
            WitnessKind::NonAlgebraic => "non_algebraic",
            WitnessKind::NonExponential => "non_exponential",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for WitnessKind {
    type Err = WitnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non_ergodic" => Ok(WitnessKind::NonErgodic),
            "non_strong" => Ok(WitnessKind::NonStrong),
            "non_algebraic" => Ok(WitnessKind::NonAlgebraic),
            "non_exponential" => Ok(WitnessKind::NonExponential),
            _ => Err(WitnessError::File(format!("unknown witness kind {s:?}"))),
        }
    }
}

/// Values of a term beyond its largest listed state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Extent {
    /// y = 0 at every unlisted state.
    #[default]
    Zero,
    /// y = value past the largest listed state; unlisted states below it are 0.
    Constant { value: f64 },
    /// Only the listed prefix is known; rows reaching past it are not checked.
    Prefix,
}

impl Extent {
    fn is_zero(&self) -> bool {
        matches!(self, Extent::Zero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessTerm {
    /// (state, y_state), sorted by state.
    pub support: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Extent::is_zero")]
    pub extent: Extent,
    /// Truncation level the term was generated at.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

impl WitnessTerm {
    pub fn new(mut support: Vec<(usize, f64)>, extent: Extent) -> Self {
        support.sort_by_key(|e| e.0);
        WitnessTerm { support, extent, level: None }
    }

    /// Dense values y_0..y_{len-1}, zero extent.
    pub fn from_dense(values: &[f64]) -> Self {
        WitnessTerm::new(values.iter().copied().enumerate().collect(), Extent::Zero)
    }

    pub fn last_state(&self) -> Option<usize> {
        self.support.last().map(|e| e.0)
    }

    /// y_i under the term's extent.
    pub fn value(&self, i: usize) -> f64 {
        if let Ok(p) = self.support.binary_search_by_key(&i, |e| e.0) {
            return self.support[p].1;
        }
        match (self.extent, self.last_state()) {
            (Extent::Constant { value }, Some(last)) if i > last => value,
            (Extent::Constant { value }, None) => value,
            _ => 0.0,
        }
    }

    fn validate(&self, term: usize) -> Result<()> {
        let bad = |reason: String| Err(WitnessError::InvalidTerm { term, reason });
        if self.support.windows(2).any(|w| w[0].0 >= w[1].0) {
            return bad("support states must be distinct and sorted".into());
        }
        if let Some(&(s, v)) = self.support.iter().find(|e| !e.1.is_finite()) {
            return bad(format!("value {v} at state {s} is not finite"));
        }
        if let Extent::Constant { value } = self.extent {
            if !value.is_finite() {
                return bad(format!("tail value {value} is not finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    User,
    /// Truncated minimal solutions at the listed levels.
    Generated { levels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSequence {
    pub kind: WitnessKind,
    /// Order of the finite moment for non_algebraic witnesses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    pub terms: Vec<WitnessTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl WitnessSequence {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| WitnessError::File(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }
}

/// Per-term outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub index: usize,
    /// max over the checked region of (y_i − rhs_i)⁺ / (1 + |y_i|).
    pub max_violation: f64,
    pub worst_state: Option<usize>,
    /// Violation restricted to checked states outside the listed support.
    pub ring_violation: f64,
    pub checked_states: usize,
    /// Every state ≤ scan_limit was checked, plus out-neighbors of the support.
    pub scan_limit: usize,
    /// Prefix extent: states skipped because their row leaves the prefix.
    pub skipped_states: usize,
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema: u32,
    pub kind: WitnessKind,
    pub tol: f64,
    pub terms: Vec<TermReport>,
    /// Running maximum of the per-term statistic.
    pub statistic: Vec<f64>,
    pub verdict: BoundednessVerdict,
    pub max_violation: f64,
    pub passes: bool,
    pub reasons: Vec<String>,
    /// Set when a truncated moment table stood in for the exact source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_note: Option<String>,
}

pub const DEFAULT_WITNESS_TOL: f64 = 1e-9;

/// Extra lattice levels scanned past the support.
const RING_LEVELS: usize = 1;

struct Inequality<'a> {
    gen: &'a dyn Generator,
    h: &'a TargetSet,
    kind: WitnessKind,
    discrete: bool,
    ell: usize,
    table: Option<&'a [f64]>,
}

impl Inequality<'_> {
    /// (coefficient scale, source) at state i.
    fn coefficients(&self, i: usize, q: f64, lambda: Option<f64>) -> (f64, f64) {
        match self.kind {
            WitnessKind::NonExponential => {
                let l = lambda.unwrap_or(0.0);
                if l >= q {
                    return (f64::NAN, f64::NAN);
                }
                (q / (q - l), 1.0 / (q - l))
            }
            WitnessKind::NonAlgebraic if self.ell > 0 => {
                let t = self.table.and_then(|t| t.get(i).copied()).unwrap_or(0.0);
                if self.discrete {
                    (1.0, t)
                } else {
                    (1.0, (self.ell + 1) as f64 / q * t)
                }
            }
            _ => (1.0, if self.discrete { 1.0 } else { 1.0 / q }),
        }
    }

    fn checked_at(&self, i: usize) -> bool {
        self.kind != WitnessKind::NonStrong || !self.h.contains(i)
    }

    fn statistic(&self, term: &WitnessTerm) -> f64 {
        match self.kind {
            WitnessKind::NonStrong => {
                let listed = term.support.iter().filter(|e| !self.h.contains(e.0)).map(|e| e.1);
                let beyond = match term.extent {
                    Extent::Zero => 0.0,
                    Extent::Constant { value } => value,
                    Extent::Prefix => f64::NEG_INFINITY,
                };
                listed.fold(beyond, f64::max)
            }
            _ => self.h.members().iter().map(|&s| term.value(s)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn check_term(&self, index: usize, term: &WitnessTerm, lambda: Option<f64>) -> Result<TermReport> {
        let gen = self.gen;
        let top = term.last_state().unwrap_or(0).max(self.h.max());
        let scan_limit = match term.extent {
            Extent::Prefix => top,
            _ => last_index_of_level(gen, gen.lattice().level_of(top) + RING_LEVELS),
        };
        let mut region: Vec<usize> = (0..=scan_limit).collect();
        if !matches!(term.extent, Extent::Prefix) {
            for &(s, _) in &term.support {
                region.extend(embedded_row(gen, s)?.into_iter().map(|e| e.0).filter(|&j| j > scan_limit));
            }
            region.sort_unstable();
            region.dedup();
        }
        let discrete = self.discrete;
        let evaluated: Vec<Option<(usize, f64, bool)>> = region
            .par_iter()
            .map(|&i| -> Result<Option<(usize, f64, bool)>> {
                if !self.checked_at(i) {
                    return Ok(None);
                }
                let row = embedded_row(gen, i)?;
                if matches!(term.extent, Extent::Prefix) && row.iter().any(|e| e.0 > top) {
                    return Ok(Some((i, f64::NAN, false)));
                }
                let q = if discrete { 1.0 } else { gen.total_rate(i) };
                let (scale, src) = self.coefficients(i, q, lambda);
                let sum: f64 = row.iter().filter(|e| !self.h.contains(e.0)).map(|&(j, p)| p * term.value(j)).sum();
                let y = term.value(i);
                let excess = y - (scale * sum + src);
                let v = if excess.is_nan() { f64::INFINITY } else { excess.max(0.0) / (1.0 + y.abs()) };
                let listed = term.support.binary_search_by_key(&i, |e| e.0).is_ok();
                Ok(Some((i, v, listed)))
            })
            .collect::<Result<_>>()?;
        let mut max_violation = 0.0f64;
        let mut worst_state = None;
        let mut ring_violation = 0.0f64;
        let mut checked = 0;
        let mut skipped = 0;
        for (i, v, listed) in evaluated.into_iter().flatten() {
            if v.is_nan() {
                skipped += 1;
                continue;
            }
            checked += 1;
            if v > max_violation {
                max_violation = v;
                worst_state = Some(i);
            }
            if !listed {
                ring_violation = ring_violation.max(v);
            }
        }
        Ok(TermReport {
            index,
            max_violation,
            worst_state,
            ring_violation,
            checked_states: checked,
            scan_limit,
            skipped_states: skipped,
            statistic: self.statistic(term),
            lambda,
        })
    }
}

/// Checks every term against the inequality of its kind and reads the
/// divergence of the running-max statistic.
///
/// `moments` holds lower bounds for E_i σ_H^ell indexed by state (states past
/// its end count as 0); it is required for non_algebraic witnesses with ell ≥ 1.
pub fn verify_witness(
    gen: &dyn Generator,
    h: &TargetSet,
    w: &WitnessSequence,
    tol: f64,
    moments: Option<&[f64]>,
) -> Result<WitnessReport> {
    if w.terms.is_empty() {
        return Err(WitnessError::Empty);
    }
    let discrete = gen.kind() == ChainKind::Discrete;
    if discrete && w.kind == WitnessKind::NonExponential {
        return Err(WitnessError::UnsupportedKind(w.kind));
    }
    if w.kind == WitnessKind::NonExponential && w.lambdas.len() != w.terms.len() {
        return Err(WitnessError::MissingLambdas { terms: w.terms.len(), lambdas: w.lambdas.len() });
    }
    let ell = w.ell.unwrap_or(0);
    if w.kind == WitnessKind::NonAlgebraic && ell > 0 && moments.is_none() {
        return Err(WitnessError::MissingMomentTable { ell });
    }
    for (k, t) in w.terms.iter().enumerate() {
        t.validate(k)?;
        if w.kind == WitnessKind::NonStrong && t.support.iter().any(|e| h.contains(e.0)) {
            return Err(WitnessError::InvalidTerm { term: k, reason: "non_strong terms live outside H".into() });
        }
    }
    let ineq = Inequality { gen, h, kind: w.kind, discrete, ell, table: moments };
    let terms: Vec<TermReport> = w
        .terms
        .par_iter()
        .enumerate()
        .map(|(k, t)| ineq.check_term(k, t, w.lambdas.get(k).copied()))
        .collect::<Result<_>>()?;

    let mut reasons = Vec::new();
    let max_violation = terms.iter().map(|t| t.max_violation).fold(0.0, f64::max);
    if max_violation > tol {
        let bad = terms.iter().filter(|t| t.max_violation > tol).count();
        reasons.push(format!("{bad} term(s) violate the inequality (max {max_violation:.3e} > {tol:.1e})"));
    }
    if w.kind == WitnessKind::NonExponential {
        if let Some(k) = w.terms.iter().position(|t| !t.extent.is_zero()) {
            reasons.push(format!("term {k} is not finitely supported"));
        }
        if w.lambdas.iter().any(|l| !(*l > 0.0)) {
            reasons.push("rates must be positive".into());
        }
        if w.lambdas.windows(2).any(|p| p[1] >= p[0]) {
            reasons.push("rates must be strictly decreasing".into());
        }
    }
    let mut statistic = Vec::with_capacity(terms.len());
    let mut run = f64::NEG_INFINITY;
    for t in &terms {
        run = run.max(t.statistic);
        statistic.push(run);
    }
    let verdict = if statistic.iter().all(|s| s.is_finite()) {
        boundedness_verdict(&statistic, &VerdictRule::default()).unwrap_or_else(|_| BoundednessVerdict::inconclusive())
    } else {
        BoundednessVerdict::inconclusive()
    };
    if !verdict.state.is_diverging() {
        reasons.push(format!("statistic is not diverging ({})", verdict.state));
    }
    let source_note = (w.kind == WitnessKind::NonAlgebraic && ell > 0)
        .then(|| "checked against a truncated (lower-bound) moment table".to_string());
    Ok(WitnessReport {
        schema: 1,
        kind: w.kind,
        tol,
        terms,
        statistic,
        verdict,
        max_violation,
        passes: reasons.is_empty(),
        reasons,
        source_note,
    })
}

/// Lower-bound table for E_i σ_H^ell at truncation level `level`, indexed by state.
pub fn moment_source(gen: &dyn Generator, h: &TargetSet, ell: usize, level: usize) -> Result<Vec<f64>> {
    if ell == 0 {
        return Ok(vec![1.0; effective_level(gen, level) + 1]);
    }
    Ok(moment_ladder(gen, h, ell, level)?.pop().unwrap().dense())
}

/// Default generation levels: state indices 2^4, 2^5, … (lattice levels for
/// multi-dimensional models).
pub fn default_levels(count: usize) -> Vec<usize> {
    (0..count).map(|k| 1usize << (k + 4).min(40)).collect()
}

fn resolve_levels(gen: &dyn Generator, count: usize, schedule: Option<&[usize]>) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(WitnessError::ZeroCount);
    }
    let raw = match schedule {
        Some(s) if s.len() < count => return Err(WitnessError::ShortSchedule { have: s.len(), need: count }),
        Some(s) => s[..count].to_vec(),
        None => default_levels(count),
    };
    let lattice = gen.lattice().dim > 1;
    Ok(raw.into_iter().map(|n| if lattice { last_index_of_level(gen, n) } else { effective_level(gen, n) }).collect())
}

fn term_from_table(table: &MomentTable, with_h: bool) -> WitnessTerm {
    let mut support: Vec<(usize, f64)> = table.states.iter().copied().zip(table.values.iter().copied()).collect();
    if with_h {
        support.extend(table.h_values.iter().copied());
    }
    let mut t = WitnessTerm::new(support, Extent::Zero);
    t.level = Some(table.level);
    t
}

fn generate_polynomial(
    gen: &dyn Generator,
    h: &TargetSet,
    kind: WitnessKind,
    order: usize,
    count: usize,
    schedule: Option<&[usize]>,
) -> Result<WitnessSequence> {
    let levels = resolve_levels(gen, count, schedule)?;
    let terms: Vec<WitnessTerm> = levels
        .par_iter()
        .map(|&n| -> Result<WitnessTerm> {
            let table = moment_ladder(gen, h, order, n)?.pop().unwrap();
            if table.values.iter().chain(table.h_values.iter().map(|e| &e.1)).any(|v| !v.is_finite()) {
                return Err(WitnessError::InfiniteTerm { level: table.level });
            }
            Ok(term_from_table(&table, kind != WitnessKind::NonStrong))
        })
        .collect::<Result<_>>()?;
    let ell = (kind == WitnessKind::NonAlgebraic).then_some(order - 1);
    Ok(WitnessSequence { kind, ell, terms, lambdas: Vec::new(), provenance: Provenance::Generated { levels } })
}

/// Terms y^(n) = truncated E_· σ_H at level N_n, extended by 0, H values attached.
pub fn gen_nonergodic_witness(
    gen: &dyn Generator,
    h: &TargetSet,
    count: usize,
    schedule: Option<&[usize]>,
) -> Result<WitnessSequence> {
    generate_polynomial(gen, h, WitnessKind::NonErgodic, 1, count, schedule)
}

/// Same solutions restricted to states outside H; the statistic is their sup.
pub fn gen_nonstrong_witness(
    gen: &dyn Generator,
    h: &TargetSet,
    count: usize,
    schedule: Option<&[usize]>,
) -> Result<WitnessSequence> {
    generate_polynomial(gen, h, WitnessKind::NonStrong, 1, count, schedule)
}

/// Truncated E_· σ_H^{ell+1} ladders; verify with [`moment_source`] for ell.
pub fn gen_nonalgebraic_witness(
    gen: &dyn Generator,
    h: &TargetSet,
    ell: usize,
    count: usize,
    schedule: Option<&[usize]>,
) -> Result<WitnessSequence> {
    generate_polynomial(gen, h, WitnessKind::NonAlgebraic, ell + 1, count, schedule)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NonExpOptions {
    /// Target value of the first term.
    pub first: usize,
    /// Candidate levels are 0, 1, 2, 4, …, 2^max_exponent.
    pub max_exponent: u32,
    pub bisection_iters: usize,
    /// |x_H − n| ≤ rel_tol·n at the accepted rate.
    pub rel_tol: f64,
}

impl Default for NonExpOptions {
    fn default() -> Self {
        NonExpOptions { first: 1, max_exponent: 20, bisection_iters: 60, rel_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTerm {
    pub n: usize,
    /// Truncated E σ_H already ≥ n, so no positive rate lands on n.
    pub ordinary: f64,
    pub level: usize,
}

/// Term n whose sweep at the rate cap was still growing at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetStop {
    pub n: usize,
    pub level: usize,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpTermInfo {
    pub n: usize,
    pub level: usize,
    pub lambda: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum NonExpOutcome {
    /// `stopped` is set when the level budget ran out before all requested terms.
    Witness { sequence: WitnessSequence, info: Vec<ExpTermInfo>, skipped: Vec<SkippedTerm>, stopped: Option<BudgetStop> },
    /// x_H at the rate cap stays below n at every level; `evidence` is (level, x_H(cap)).
    NoWitness { n: usize, cap: f64, evidence: Vec<(usize, f64)> },
}

struct ExpProbe<'a> {
    gen: &'a dyn Generator,
    h: &'a TargetSet,
}

impl ExpProbe<'_> {
    fn table(&self, lambda: f64, level: usize) -> Result<MomentTable> {
        let source = if lambda > 0.0 { SystemSource::Exponential { lambda } } else { SystemSource::Ordinary };
        let sys = build_truncated_system(self.gen, self.h, level, source)?;
        let (values, h_values) = solve_truncated(&sys)?;
        Ok(MomentTable { order: 0, level: sys.level, states: sys.unknowns.clone(), values, h_values })
    }

    fn value(&self, lambda: f64, level: usize) -> Result<f64> {
        Ok(self.table(lambda, level)?.max_h())
    }
}

/// Finitely supported truncated exponential solutions with max_H x = n and
/// λ_n ≤ 1/n, for n = first, first+1, … (count values).
pub fn gen_nonexp_witness(gen: &dyn Generator, h: &TargetSet, count: usize, opts: &NonExpOptions) -> Result<NonExpOutcome> {
    if count == 0 {
        return Err(WitnessError::ZeroCount);
    }
    if gen.kind() == ChainKind::Discrete {
        return Err(WitnessError::UnsupportedKind(WitnessKind::NonExponential));
    }
    let mut levels: Vec<usize> = std::iter::once(0)
        .chain((0..=opts.max_exponent).map(|k| 1usize << k))
        .map(|n| effective_level(gen, n.max(h.max())))
        .collect();
    levels.dedup();
    let top = *levels.last().unwrap();
    let bound = rate_bound(gen, top);
    if !(bound.lambda_prime > 0.0) {
        return Err(WitnessError::ZeroInfRate(top + 1));
    }
    let lp = bound.lambda_prime;
    let probe = ExpProbe { gen, h };
    let mut start = 0;
    let mut prev_lambda = f64::INFINITY;
    let mut terms = Vec::new();
    let mut lambdas = Vec::new();
    let mut info = Vec::new();
    let mut skipped = Vec::new();
    let mut used_levels = Vec::new();
    let mut stopped = None;
    'terms: for n in opts.first.max(1)..opts.first.max(1) + count {
        let target = n as f64;
        let cap = (1.0 / target).min(lp).min(prev_lambda * (1.0 - 1e-9));
        for (k, &level) in levels.iter().enumerate().skip(start) {
            let at_cap = probe.value(cap, level)?;
            if at_cap < target {
                continue;
            }
            let ordinary = probe.value(0.0, level)?;
            if ordinary >= target {
                skipped.push(SkippedTerm { n, ordinary, level });
                start = k;
                continue 'terms;
            }
            let (mut lo, mut hi) = (0.0, cap);
            let mut lambda = cap;
            let mut value = at_cap;
            for _ in 0..opts.bisection_iters {
                if (value - target).abs() <= opts.rel_tol * target {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let v = probe.value(mid, level)?;
                if v >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
                lambda = mid;
                value = v;
            }
            let table = probe.table(lambda, level)?;
            start = k;
            prev_lambda = lambda;
            let mut term = term_from_table(&table, true);
            term.level = Some(level);
            terms.push(term);
            lambdas.push(lambda);
            used_levels.push(level);
            info.push(ExpTermInfo { n, level, lambda, value: table.max_h() });
            continue 'terms;
        }
        // Below n at every level: settled when the state space is exhausted or
        // the sweep at the cap has converged below n.
        let evidence: Vec<(usize, f64)> =
            levels.iter().map(|&l| Ok((l, probe.value(cap, l)?))).collect::<Result<_>>()?;
        let exhausted = gen.state_count().is_some_and(|c| top + 1 >= c);
        let (ls, vs): (Vec<usize>, Vec<f64>) = evidence.iter().copied().unzip();
        let settled = exhausted
            || boundedness_verdict_at(&ls, &vs, &VerdictRule::default())
                .is_ok_and(|v| matches!(v.state, VerdictState::Converged { limit } if limit < target));
        if settled {
            return Ok(NonExpOutcome::NoWitness { n, cap, evidence });
        }
        if terms.is_empty() {
            return Err(WitnessError::BudgetExhausted { n, level: top, cap });
        }
        stopped = Some(BudgetStop { n, level: top, cap });
        break;
    }
    let sequence = WitnessSequence {
        kind: WitnessKind::NonExponential,
        ell: None,
        terms,
        lambdas,
        provenance: Provenance::Generated { levels: used_levels },
    };
    Ok(NonExpOutcome::Witness { sequence, info, skipped, stopped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ExplicitChain;
    use crate::zoo::{AlphaFamily, BirthDeathGamma, Catastrophe};

    #[test]
    fn explicit_bd_nonergodic_family_passes() {
        // y_0 = n+1, increments d_k = n − H_{k−1}; equality holds for γ = 1.
        let gen = BirthDeathGamma::new(1.0).unwrap();
        let k_max = 400;
        let terms: Vec<WitnessTerm> = (1..=12)
            .map(|n| {
                let n = n as f64;
                let mut y = vec![n + 1.0];
                let (mut acc, mut harmonic) = (0.0, 0.0);
                for k in 1..=k_max {
                    acc += n - harmonic;
                    harmonic += 1.0 / k as f64;
                    y.push(acc);
                }
                let mut t = WitnessTerm::from_dense(&y);
                t.extent = Extent::Prefix;
                t
            })
            .collect();
        let w = WitnessSequence {
            kind: WitnessKind::NonErgodic,
            ell: None,
            terms,
            lambdas: vec![],
            provenance: Provenance::User,
        };
        let r = verify_witness(&gen, &TargetSet::root(), &w, 1e-9, None).unwrap();
        assert!(r.passes, "{:?}", r.reasons);
        assert_eq!(r.terms[0].skipped_states, 1);
    }

    #[test]
    fn zero_witness_fails_on_divergence_only() {
        let gen = BirthDeathGamma::new(1.0).unwrap();
        let w = WitnessSequence {
            kind: WitnessKind::NonErgodic,
            ell: None,
            terms: vec![WitnessTerm::from_dense(&[0.0; 8]); 5],
            lambdas: vec![],
            provenance: Provenance::User,
        };
        let r = verify_witness(&gen, &TargetSet::root(), &w, 1e-9, None).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert!(!r.passes);
    }

    #[test]
    fn violation_is_located() {
        let gen = BirthDeathGamma::new(1.0).unwrap();
        let mut y = vec![0.0; 5];
        y[3] = 10.0;
        let w = WitnessSequence {
            kind: WitnessKind::NonErgodic,
            ell: None,
            terms: vec![WitnessTerm::from_dense(&y)],
            lambdas: vec![],
            provenance: Provenance::User,
        };
        let r = verify_witness(&gen, &TargetSet::root(), &w, 1e-9, None).unwrap();
        assert_eq!(r.terms[0].worst_state, Some(3));
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"kind":"non_exponential","terms":[{"support":[[0,1.5],[1,0.5]]}],"lambdas":[0.25]}"#;
        let w = WitnessSequence::from_json(s).unwrap();
        assert_eq!(w.kind, WitnessKind::NonExponential);
        assert_eq!(w.terms[0].value(1), 0.5);
        assert_eq!(w.terms[0].value(7), 0.0);
        assert_eq!(WitnessSequence::from_json(&w.to_json()).unwrap(), w);
    }

    #[test]
    fn constant_extent_value() {
        let t = WitnessTerm::new(vec![(2, 1.0), (0, 3.0)], Extent::Constant { value: 4.0 });
        assert_eq!((t.value(0), t.value(1), t.value(2), t.value(9)), (3.0, 0.0, 1.0, 4.0));
    }

    #[test]
    fn missing_inputs_are_errors() {
        let gen = ExplicitChain::two_state(1.0, 1.0).unwrap();
        let mut w = WitnessSequence {
            kind: WitnessKind::NonExponential,
            ell: None,
            terms: vec![WitnessTerm::from_dense(&[1.0])],
            lambdas: vec![],
            provenance: Provenance::User,
        };
        assert!(matches!(
            verify_witness(&gen, &TargetSet::root(), &w, 1e-9, None),
            Err(WitnessError::MissingLambdas { .. })
        ));
        w.kind = WitnessKind::NonAlgebraic;
        w.ell = Some(1);
        assert!(matches!(
            verify_witness(&gen, &TargetSet::root(), &w, 1e-9, None),
            Err(WitnessError::MissingMomentTable { ell: 1 })
        ));
    }

    #[test]
    fn two_state_has_no_exponential_witness() {
        let gen = ExplicitChain::two_state(1.0, 1.0).unwrap();
        let out = gen_nonexp_witness(&gen, &TargetSet::root(), 20, &NonExpOptions::default()).unwrap();
        assert!(matches!(out, NonExpOutcome::NoWitness { .. }));
    }

    #[test]
    fn generated_terms_satisfy_inequalities() {
        let gen = BirthDeathGamma::new(0.5).unwrap();
        let h = TargetSet::root();
        let w = gen_nonergodic_witness(&gen, &h, 6, None).unwrap();
        let r = verify_witness(&gen, &h, &w, 1e-9, None).unwrap();
        assert!(r.max_violation <= 1e-9);
        assert!(r.passes, "{:?}", r.reasons);
        let cat = Catastrophe::new(AlphaFamily::Constant { c: 1.0 }).unwrap();
        let w = gen_nonergodic_witness(&cat, &h, 6, None).unwrap();
        let r = verify_witness(&cat, &h, &w, 1e-9, None).unwrap();
        assert!(r.max_violation <= 1e-9);
        assert!(!r.passes);
        assert!(r.statistic.iter().all(|s| *s <= 2.0));
    }
}
