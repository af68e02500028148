//! Verdicts on monotone evidence sequences and the full hierarchy report.
//!
//! Every sequence fed here is a nondecreasing lower-bound sequence for a
//! quantity that is either finite or +∞. The rule reads the tail windows and
//! answers Converged, Diverging or Inconclusive; it never promotes a
//! borderline tail to a definite answer.

use crate::chain::{
    effective_level, embedded_row, last_index_of_level, ChainError, Generator, TargetSet,
};
use crate::moments::{
    exp_moment_scan, ladder_sweeps, pow2_schedule, validate_schedule, MomentError, MomentSweep,
};
use crate::single_birth::{build_tableau, recurrence_explicit};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("sequence too short: {len} values, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("sequence decreases at index {index}")]
    NotMonotone { index: usize },
    #[error("value at index {index} is NaN or -inf")]
    NotFinite { index: usize },
    #[error("levels ({levels}) and values ({values}) differ in length")]
    LengthMismatch { levels: usize, values: usize },
    #[error("levels must be nondecreasing")]
    LevelsNotSorted,
    #[error("polynomial order L must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("single-birth route failed: {0}")]
    SingleBirth(String),
}

pub type Result<T> = std::result::Result<T, ClassifierError>;

/// Ratio drift allowed in the exponential tier.
pub const EXP_RATIO_DRIFT: f64 = 0.002;

/// Relative slack when a level profile is read as nondecreasing.
const MONOTONE_TOL: f64 = 1e-12;

/// Thresholds of the window rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerdictRule {
    /// Relative increment below which the last two windows count as a plateau.
    pub tol_conv: f64,
    /// Smallest increment per window that may count as growth.
    pub tol_div: f64,
    /// Consecutive windows inspected for growth and geometric decay.
    pub windows: usize,
    /// Largest window-to-window ratio accepted as geometric decay.
    pub geometric_ratio: f64,
    /// Geometric-tail estimate must stay below this fraction of the last value.
    pub max_tail_fraction: f64,
    /// Slack allowed when increments·position are compared (≈ 1/log growth).
    pub subharmonic_slack: f64,
    /// Ratio above which growth is reported as geometric.
    pub geometric_growth: f64,
    /// Window ratios of a geometric tail may rise by at most this fraction
    /// (ratios up to 0.6 are exempt); a rising ratio means decay is slowing.
    pub ratio_drift: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule {
            tol_conv: 1e-6,
            tol_div: 1e-4,
            windows: 3,
            geometric_ratio: 0.9,
            max_tail_fraction: 0.05,
            subharmonic_slack: 0.02,
            geometric_growth: 1.1,
            ratio_drift: 0.05,
        }
    }
}

impl VerdictRule {
    pub fn with_tol(mut self, tol_conv: f64) -> Self {
        self.tol_conv = tol_conv;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Growth {
    /// A value is already +∞.
    Infinite,
    Geometric { ratio: f64 },
    /// Non-shrinking increments per window.
    Logarithmic,
    /// Increments shrinking no faster than 1/position.
    SubLogarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictState {
    Converged { limit: f64 },
    Diverging { growth: Growth },
    Inconclusive,
}

impl VerdictState {
    pub fn same_kind(&self, other: &VerdictState) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, VerdictState::Converged { .. })
    }

    pub fn is_diverging(&self) -> bool {
        matches!(self, VerdictState::Diverging { .. })
    }
}

impl fmt::Display for VerdictState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictState::Converged { limit } => write!(f, "Converged({limit})"),
            VerdictState::Diverging { growth } => {
                let g = match growth {
                    Growth::Infinite => "infinite".to_string(),
                    Growth::Geometric { ratio } => format!("geometric, ratio {ratio:.3}"),
                    Growth::Logarithmic => "logarithmic".to_string(),
                    Growth::SubLogarithmic => "sub-logarithmic".to_string(),
                };
                write!(f, "Diverging({g})")
            }
            VerdictState::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// Tail statistics behind a verdict.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowStats {
    pub tail: Vec<f64>,
    /// Increments per unit position over the inspected windows.
    pub increments: Vec<f64>,
    /// (s_k − s_{k−1})/(1 + s_k) for the last two windows.
    pub relative_increments: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Which branch of the rule fired.
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessVerdict {
    pub state: VerdictState,
    pub evidence: WindowStats,
}

impl BoundednessVerdict {
    pub fn inconclusive() -> Self {
        BoundednessVerdict { state: VerdictState::Inconclusive, evidence: WindowStats::default() }
    }
}

/// Verdict on a sequence indexed 1, 2, 3, …
pub fn boundedness_verdict(values: &[f64], rule: &VerdictRule) -> Result<BoundednessVerdict> {
    let pos: Vec<f64> = (1..=values.len()).map(|k| k as f64).collect();
    verdict_on_positions(&pos, values, rule)
}

/// Verdict on values sampled at truncation levels; windows are doublings of the level.
pub fn boundedness_verdict_at(levels: &[usize], values: &[f64], rule: &VerdictRule) -> Result<BoundednessVerdict> {
    if levels.len() != values.len() {
        return Err(ClassifierError::LengthMismatch { levels: levels.len(), values: values.len() });
    }
    if levels.windows(2).any(|w| w[0] > w[1]) {
        return Err(ClassifierError::LevelsNotSorted);
    }
    let pos: Vec<f64> = levels.iter().map(|&n| (n.max(1) as f64).log2()).collect();
    verdict_on_positions(&pos, values, rule)
}

fn verdict_on_positions(pos: &[f64], v: &[f64], rule: &VerdictRule) -> Result<BoundednessVerdict> {
    let m = v.len();
    if m < 3 {
        return Err(ClassifierError::TooShort { len: m, min: 3 });
    }
    if let Some(index) = v.iter().position(|x| x.is_nan() || *x == f64::NEG_INFINITY) {
        return Err(ClassifierError::NotFinite { index });
    }
    if let Some(first_inf) = v.iter().position(|x| x.is_infinite()) {
        if v[first_inf..].iter().any(|x| x.is_finite()) {
            return Err(ClassifierError::NotMonotone { index: first_inf + 1 });
        }
        let evidence = WindowStats { tail: v[m.saturating_sub(4)..].to_vec(), rule: "infinite".into(), ..Default::default() };
        return Ok(BoundednessVerdict { state: VerdictState::Diverging { growth: Growth::Infinite }, evidence });
    }
    for k in 1..m {
        if v[k] < v[k - 1] - 1e-12 * (1.0 + v[k].abs()) {
            return Err(ClassifierError::NotMonotone { index: k });
        }
    }
    // Increments per unit position; coincident positions count as one unit.
    let inc: Vec<f64> = (1..m)
        .map(|k| {
            let dp = pos[k] - pos[k - 1];
            (v[k] - v[k - 1]).max(0.0) / if dp > 0.0 { dp } else { 1.0 }
        })
        .collect();
    let rel: Vec<f64> = (1..m).map(|k| (v[k] - v[k - 1]).max(0.0) / (1.0 + v[k].abs())).collect();
    let w = rule.windows.max(2).min(inc.len());
    let tail_inc = inc[inc.len() - w..].to_vec();
    let ratio_of = |a: f64, b: f64| {
        if a > 0.0 {
            b / a
        } else if b > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };
    let ratios: Vec<f64> = tail_inc.windows(2).map(|p| ratio_of(p[0], p[1])).collect();
    let mut evidence = WindowStats {
        tail: v[m - w - 1..].to_vec(),
        increments: tail_inc.clone(),
        relative_increments: rel[rel.len() - 2..].to_vec(),
        ratios: ratios.clone(),
        rule: String::new(),
    };
    let last = v[m - 1];
    let (i1, i2) = (inc[inc.len() - 2], inc[inc.len() - 1]);
    let plateau = rel[rel.len() - 2..].iter().all(|r| *r < rule.tol_conv) && (i2 <= i1 || i2 < rule.tol_div);
    if plateau {
        evidence.rule = "plateau".into();
        return Ok(BoundednessVerdict { state: VerdictState::Converged { limit: last }, evidence });
    }
    if inc.len() >= rule.windows.max(2) {
        let big = tail_inc.iter().all(|d| *d >= rule.tol_div);
        let non_shrinking = ratios.iter().all(|r| *r >= 1.0);
        if big && non_shrinking {
            let g = ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64;
            let ratio = g.exp();
            let growth = if ratio > rule.geometric_growth { Growth::Geometric { ratio } } else { Growth::Logarithmic };
            evidence.rule = "non_shrinking".into();
            return Ok(BoundednessVerdict { state: VerdictState::Diverging { growth }, evidence });
        }
        let tail_pos = &pos[pos.len() - w..];
        let weighted: Vec<f64> = tail_inc.iter().zip(tail_pos).map(|(d, p)| d * p.max(1.0)).collect();
        let harmonic = weighted.windows(2).all(|p| p[1] >= p[0] * (1.0 - rule.subharmonic_slack));
        if big && harmonic {
            evidence.rule = "subharmonic".into();
            return Ok(BoundednessVerdict { state: VerdictState::Diverging { growth: Growth::SubLogarithmic }, evidence });
        }
        let steady = ratios.windows(2).all(|p| p[1] <= 0.6 || p[1] <= p[0] * (1.0 + rule.ratio_drift));
        if steady && ratios.iter().all(|r| *r <= rule.geometric_ratio) {
            let r = ratios.iter().copied().fold(0.0, f64::max);
            let tail = i2 * r / (1.0 - r);
            if tail <= rule.max_tail_fraction * (1.0 + last.abs()) {
                evidence.rule = "geometric_tail".into();
                return Ok(BoundednessVerdict { state: VerdictState::Converged { limit: last + tail }, evidence });
            }
        }
    }
    evidence.rule = "none".into();
    Ok(BoundednessVerdict { state: VerdictState::Inconclusive, evidence })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TierStatus {
    Holds,
    Fails,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    /// Finite numerical evidence under the verdict rule.
    Evidence,
    /// A checked inequality certificate.
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierReport {
    pub status: TierStatus,
    pub verdict: BoundednessVerdict,
    pub grade: Grade,
    pub source: String,
    /// (truncation level, value) pairs the verdict was read from.
    pub evidence: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TierReport {
    fn from_bound(verdict: BoundednessVerdict, source: &str, evidence: Vec<(usize, f64)>) -> Self {
        let status = match verdict.state {
            VerdictState::Converged { .. } => TierStatus::Holds,
            VerdictState::Diverging { .. } => TierStatus::Fails,
            VerdictState::Inconclusive => TierStatus::Undetermined,
        };
        TierReport { status, verdict, grade: Grade::Evidence, source: source.into(), evidence, note: None }
    }

    fn undetermined(source: &str, note: impl Into<String>) -> Self {
        TierReport {
            status: TierStatus::Undetermined,
            verdict: BoundednessVerdict::inconclusive(),
            grade: Grade::Evidence,
            source: source.into(),
            evidence: Vec::new(),
            note: Some(note.into()),
        }
    }

    fn with_note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTier {
    pub order: usize,
    pub tier: TierReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaVerdict {
    pub lambda: f64,
    pub state: VerdictState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialTier {
    pub tier: TierReport,
    pub lambda_prime: f64,
    pub rate_bound_certified: bool,
    pub per_lambda: Vec<LambdaVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub schema: u32,
    pub model: String,
    pub target: Vec<usize>,
    /// Truncation levels (highest included state index) actually used.
    pub schedule: Vec<usize>,
    pub recurrent: TierReport,
    pub ergodic: TierReport,
    /// Orders 2..=L.
    pub ell_ergodic: Vec<LadderTier>,
    pub exponentially_ergodic: ExponentialTier,
    pub strongly_ergodic: TierReport,
    pub consistent: bool,
    pub consistency_errors: Vec<String>,
}

impl ErgodicityReport {
    /// Tiers from weakest to strongest.
    pub fn tiers(&self) -> Vec<(String, &TierReport)> {
        let mut v = vec![("recurrent".to_string(), &self.recurrent), ("ergodic".to_string(), &self.ergodic)];
        for l in &self.ell_ergodic {
            v.push((format!("{}-ergodic", l.order), &l.tier));
        }
        v.push(("exponentially_ergodic".to_string(), &self.exponentially_ergodic.tier));
        v.push(("strongly_ergodic".to_string(), &self.strongly_ergodic));
        v
    }
}

/// Pairs (weaker, stronger) where the stronger tier holds but the weaker fails.
pub fn hierarchy_conflicts(tiers: &[(String, &TierReport)]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, (lo, lo_t)) in tiers.iter().enumerate() {
        for (hi, hi_t) in &tiers[i + 1..] {
            if lo_t.status == TierStatus::Fails && hi_t.status == TierStatus::Holds {
                out.push(format!("{hi} holds but {lo} fails"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub schedule: Vec<usize>,
    /// Read schedule entries as lattice levels |x| rather than state indices.
    /// `None` picks levels for multi-dimensional models.
    pub schedule_in_levels: Option<bool>,
    pub lambda_grid: Option<Vec<f64>>,
    pub rule: VerdictRule,
    /// User-supplied transience certificate for the recurrence tier.
    pub transience_certificate: Option<Vec<f64>>,
    pub skip_exponential: bool,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            schedule: pow2_schedule(4, 17),
            schedule_in_levels: None,
            lambda_grid: None,
            rule: VerdictRule::default(),
            transience_certificate: None,
            skip_exponential: false,
        }
    }
}

impl ClassifyConfig {
    pub fn with_schedule(mut self, schedule: Vec<usize>) -> Self {
        self.schedule = schedule;
        self
    }
}

/// State-index truncation levels for a configured schedule.
pub fn resolve_schedule(gen: &dyn Generator, config: &ClassifyConfig) -> Vec<usize> {
    let levels = config.schedule_in_levels.unwrap_or(gen.lattice().dim > 1);
    config
        .schedule
        .iter()
        .map(|&n| if levels { last_index_of_level(gen, n) } else { effective_level(gen, n) })
        .collect()
}

fn pairs(levels: &[usize], values: Vec<f64>) -> Vec<(usize, f64)> {
    levels.iter().copied().zip(values).collect()
}

fn sweep_tier(sweep: &MomentSweep, use_m: bool, source: &str, rule: &VerdictRule) -> TierReport {
    let levels = sweep.level_list();
    let (verdict, values) = if use_m {
        (sweep.m_verdict(rule), sweep.m_sequence())
    } else {
        (sweep.h_verdict(rule), sweep.h_sequence())
    };
    TierReport::from_bound(verdict, source, pairs(&levels, values)).with_note(sweep.failure.clone())
}

/// Hierarchy report from truncation sweeps.
pub fn classify(gen: &dyn Generator, h: &TargetSet, l: usize, config: &ClassifyConfig) -> Result<ErgodicityReport> {
    if l == 0 {
        return Err(ClassifierError::ZeroOrder);
    }
    validate_schedule(&config.schedule)?;
    let schedule = resolve_schedule(gen, config);
    let rule = &config.rule;
    let sweeps = ladder_sweeps(gen, h, l, &schedule);
    let ordinary = &sweeps[0];
    let ergodic = sweep_tier(ordinary, false, "x_h sweep", rule);
    let mut strongly_ergodic = sweep_tier(ordinary, true, "M_N sweep", rule);
    if strongly_ergodic.status == TierStatus::Holds {
        if let Some(v) = profile_growth(&ordinary.profile, rule) {
            strongly_ergodic.status = TierStatus::Fails;
            strongly_ergodic.note = Some(format!("level profile grows ({})", v.evidence.rule));
        }
    }
    let ell_ergodic: Vec<LadderTier> = sweeps[1..]
        .iter()
        .enumerate()
        .map(|(k, s)| LadderTier { order: k + 2, tier: sweep_tier(s, false, "ladder x_h sweep", rule) })
        .collect();
    let exponentially_ergodic = if config.skip_exponential {
        ExponentialTier {
            tier: TierReport::undetermined("exponential scan", "skipped"),
            lambda_prime: f64::NAN,
            rate_bound_certified: false,
            per_lambda: Vec::new(),
        }
    } else {
        exponential_tier(gen, h, &schedule, config)?
    };
    let mut exponentially_ergodic = exponentially_ergodic;
    // Finite exponential moments force finite polynomial ones; small-λ sweeps
    // can look convergent long before their divergence shows.
    if exponentially_ergodic.tier.status == TierStatus::Holds {
        let failing = std::iter::once((1, &ergodic))
            .chain(ell_ergodic.iter().map(|t: &LadderTier| (t.order, &t.tier)))
            .find(|(_, t)| t.status == TierStatus::Fails);
        if let Some((order, _)) = failing {
            let t = &mut exponentially_ergodic.tier;
            t.status = TierStatus::Fails;
            t.note = Some(format!("{}; overridden: moment of order {order} diverges", t.note.clone().unwrap_or_default()));
        }
    }
    let recurrent = recurrence_tier(gen, h, &schedule, config)?;
    let mut report = ErgodicityReport {
        schema: 1,
        model: gen.name(),
        target: h.members().to_vec(),
        schedule,
        recurrent,
        ergodic,
        ell_ergodic,
        exponentially_ergodic,
        strongly_ergodic,
        consistent: true,
        consistency_errors: Vec::new(),
    };
    report.consistency_errors = hierarchy_conflicts(&report.tiers());
    report.consistent = report.consistency_errors.is_empty();
    Ok(report)
}

/// Growth of the per-level maxima over the lower half of the deepest
/// truncation. M_N can plateau on a bump near H while the values far out
/// still climb, too slowly to overtake the bump at any reachable level.
fn profile_growth(profile: &[(usize, f64)], rule: &VerdictRule) -> Option<BoundednessVerdict> {
    let top = profile.last()?.0;
    let lower: Vec<(usize, f64)> = profile.iter().copied().filter(|&(k, _)| k >= 1 && 2 * k <= top).collect();
    let mut start = lower.len();
    while start > 0 {
        if start < lower.len() && lower[start - 1].1 > lower[start].1 + MONOTONE_TOL * (1.0 + lower[start].1.abs()) {
            break;
        }
        start -= 1;
    }
    let run = &lower[start..];
    if run.len() <= rule.windows {
        return None;
    }
    let levels: Vec<usize> = run.iter().map(|p| p.0).collect();
    let values: Vec<f64> = run.iter().map(|p| p.1).collect();
    boundedness_verdict_at(&levels, &values, rule).ok().filter(|v| v.state.is_diverging())
}

fn exponential_tier(gen: &dyn Generator, h: &TargetSet, schedule: &[usize], config: &ClassifyConfig) -> Result<ExponentialTier> {
    // Heavy-tailed hitting times give exponential sweeps that settle with
    // slowly rising window ratios; a true geometric tail keeps its ratio.
    let rule = VerdictRule { ratio_drift: config.rule.ratio_drift.min(EXP_RATIO_DRIFT), ..config.rule };
    let curve = match exp_moment_scan(gen, h, config.lambda_grid.as_deref(), schedule, &rule) {
        Ok(c) => c,
        Err(MomentError::ZeroInfRate) => {
            return Ok(ExponentialTier {
                tier: TierReport::undetermined("exponential scan", "inf q_i is zero on the prefix"),
                lambda_prime: 0.0,
                rate_bound_certified: false,
                per_lambda: Vec::new(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let per_lambda: Vec<LambdaVerdict> =
        curve.points.iter().map(|p| LambdaVerdict { lambda: p.lambda, state: p.verdict.state }).collect();
    let converged = curve.points.iter().filter(|p| p.verdict.state.is_converged()).max_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let all_diverging = !curve.points.is_empty() && curve.points.iter().all(|p| p.verdict.state.is_diverging());
    let (pick, status) = if let Some(p) = converged {
        (Some(p), TierStatus::Holds)
    } else if all_diverging {
        (curve.points.iter().min_by(|a, b| a.lambda.total_cmp(&b.lambda)), TierStatus::Fails)
    } else {
        (curve.points.iter().find(|p| !p.verdict.state.is_diverging()), TierStatus::Undetermined)
    };
    let tier = match pick {
        Some(p) => {
            let mut t = TierReport::from_bound(
                p.verdict.clone(),
                "exponential scan",
                pairs(&p.sweep.level_list(), p.sweep.h_sequence()),
            );
            t.status = status;
            t.note = Some(format!("lambda = {}", p.lambda));
            t
        }
        None => TierReport::undetermined("exponential scan", "empty grid"),
    };
    Ok(ExponentialTier {
        tier,
        lambda_prime: curve.bound.lambda_prime,
        rate_bound_certified: curve.bound.certified,
        per_lambda,
    })
}

fn recurrence_tier(gen: &dyn Generator, h: &TargetSet, schedule: &[usize], config: &ClassifyConfig) -> Result<TierReport> {
    if let Some(z) = &config.transience_certificate {
        let c = transience_certificate_check(gen, h, z);
        if c.passes {
            let mut t = TierReport::from_bound(BoundednessVerdict::inconclusive(), "transience certificate", Vec::new());
            t.status = TierStatus::Fails;
            t.grade = Grade::Certificate;
            return Ok(t);
        }
    }
    if let Some(count) = gen.state_count() {
        let mut t = TierReport::from_bound(BoundednessVerdict::inconclusive(), "finite state space", Vec::new());
        t.status = TierStatus::Holds;
        t.note = Some(format!("{count} states"));
        return Ok(t);
    }
    if let (Some(sb), true) = (gen.single_birth(), h.members() == [0]) {
        let k = *schedule.last().unwrap();
        let tableau = build_tableau(sb, k).map_err(|e| ClassifierError::SingleBirth(e.to_string()))?;
        let v = recurrence_explicit(&tableau, &config.rule).map_err(|e| ClassifierError::SingleBirth(e.to_string()))?;
        let status = match v.verdict.state {
            VerdictState::Diverging { .. } => TierStatus::Holds,
            VerdictState::Converged { .. } => TierStatus::Fails,
            VerdictState::Inconclusive => TierStatus::Undetermined,
        };
        let mut t = TierReport::from_bound(v.verdict, "partial sums of F_n^(0)", v.samples);
        t.status = status;
        t.note = v.note;
        return Ok(t);
    }
    Ok(TierReport::undetermined("none", "no recurrence criterion for this model without a certificate"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransienceCheck {
    pub passes: bool,
    /// Rows outside H whose one-step neighbourhood lies inside the prefix.
    pub rows_checked: usize,
    pub max_violation: f64,
    pub worst_row: Option<usize>,
    pub inf_z: f64,
    pub z_h: f64,
    pub strict_inf: bool,
    pub reason: Option<String>,
}

/// Checks Σ_j P_ij z_j ≤ z_i for i ∉ H on the prefix covered by `z`, and
/// −∞ < inf z < min_{h∈H} z_h.
pub fn transience_certificate_check(gen: &dyn Generator, h: &TargetSet, z: &[f64]) -> TransienceCheck {
    let mut out = TransienceCheck {
        passes: false,
        rows_checked: 0,
        max_violation: 0.0,
        worst_row: None,
        inf_z: f64::NAN,
        z_h: f64::NAN,
        strict_inf: false,
        reason: None,
    };
    if z.is_empty() || z.iter().any(|v| !v.is_finite()) {
        out.reason = Some("z must be finite and nonempty".into());
        return out;
    }
    if h.max() >= z.len() {
        out.reason = Some("z does not cover H".into());
        return out;
    }
    let tol = 1e-12 * z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..z.len() {
        if h.contains(i) {
            continue;
        }
        let row = match embedded_row(gen, i) {
            Ok(r) => r,
            Err(e) => {
                out.reason = Some(e.to_string());
                return out;
            }
        };
        if row.iter().any(|e| e.0 >= z.len()) {
            continue;
        }
        out.rows_checked += 1;
        let lhs: f64 = row.iter().map(|&(j, p)| p * z[j]).sum();
        let viol = lhs - z[i];
        if viol > out.max_violation {
            out.max_violation = viol;
            out.worst_row = Some(i);
        }
    }
    out.inf_z = z.iter().copied().fold(f64::INFINITY, f64::min);
    out.z_h = h.members().iter().map(|&s| z[s]).fold(f64::INFINITY, f64::min);
    out.strict_inf = out.inf_z < out.z_h - tol;
    let ok_rows = out.max_violation <= tol && out.rows_checked > 0;
    out.passes = ok_rows && out.strict_inf;
    if !out.passes {
        out.reason = Some(if !ok_rows {
            "super-harmonic inequality violated".into()
        } else {
            "inf z is not strictly below z on H".into()
        });
    }
    out
}
