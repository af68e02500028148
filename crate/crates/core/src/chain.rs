//! Countable-state generators, embedded kernels and truncated systems.
//!
//! A [`Generator`] is a pure row function over state indices. Multi-dimensional
//! models map lattice points to indices with the level-major order of
//! [`crate::lattice`]. A [`TruncatedSystem`] keeps the states outside H with
//! index ≤ N as unknowns; every transition into H or above N is dropped, which
//! is the same as redirecting the escaping mass into H.

use crate::lattice::Lattice;
use crate::single_birth::SingleBirthRates;
use crate::solver::{NonnegAffineOperator, SparseMatrix};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Relative tolerance for rate validation.
pub const RATE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("state {state} has zero total rate")]
    Absorbing { state: usize },
    #[error("invalid entry {value} at ({from},{to})")]
    InvalidEntry { from: usize, to: usize, value: f64 },
    #[error("probability row {state} sums to {sum}")]
    RowSum { state: usize, sum: f64 },
    #[error("capacity ends inside level {level}; complete levels hold {complete_states} states")]
    CapacityExhausted { level: usize, complete_states: usize },
    #[error("capacity must be at least 1")]
    ZeroCapacity,
    #[error("target set must be nonempty")]
    EmptyTarget,
    #[error("target state {state} lies outside truncation level {level}")]
    TargetOutsideTruncation { state: usize, level: usize },
    #[error("rate {lambda} is not below the smallest total rate {min_rate} of the truncation")]
    LambdaTooLarge { lambda: f64, min_rate: f64 },
    #[error("rate {0} must be positive")]
    NonPositiveLambda(f64),
    #[error("source vector has length {got}, expected {expected}")]
    SourceLength { got: usize, expected: usize },
    #[error("state {state} outside the state space of size {size}")]
    OutOfRange { state: usize, size: usize },
    #[error("model file: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, ChainError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Continuous,
    Discrete,
}

/// A conservative rate matrix (continuous kind) or transition matrix (discrete kind).
pub trait Generator: Send + Sync {
    fn name(&self) -> String;

    fn kind(&self) -> ChainKind {
        ChainKind::Continuous
    }

    /// Continuous kind: off-diagonal rates q_ij > 0. Discrete kind: the full
    /// probability row, diagonal included.
    fn row(&self, i: usize) -> Vec<(usize, f64)>;

    /// q_i for continuous chains, 1 for discrete ones.
    fn total_rate(&self, i: usize) -> f64 {
        match self.kind() {
            ChainKind::Continuous => self.row(i).iter().map(|e| e.1).sum(),
            ChainKind::Discrete => 1.0,
        }
    }

    /// Some(n) for finite chains.
    fn state_count(&self) -> Option<usize> {
        None
    }

    fn lattice(&self) -> Lattice {
        Lattice::new(1)
    }

    fn single_birth(&self) -> Option<&dyn SingleBirthRates> {
        None
    }
}

pub type SharedGenerator = Arc<dyn Generator>;

/// Largest usable state index for truncation level `n`.
pub fn effective_level(gen: &dyn Generator, n: usize) -> usize {
    match gen.state_count() {
        Some(c) => n.min(c.saturating_sub(1)),
        None => n,
    }
}

/// Level (|x|) of a state index.
pub fn level_of(gen: &dyn Generator, i: usize) -> usize {
    gen.lattice().level_of(i)
}

/// Largest state index whose level is at most `level`.
pub fn last_index_of_level(gen: &dyn Generator, level: usize) -> usize {
    effective_level(gen, gen.lattice().level_offset(level + 1) - 1)
}

/// Checks one row: positive finite rates, no diagonal for continuous rows,
/// unit row sum for discrete rows.
pub fn validate_row(gen: &dyn Generator, i: usize) -> Result<()> {
    let row = gen.row(i);
    match gen.kind() {
        ChainKind::Continuous => {
            for &(j, v) in &row {
                if j == i || !(v.is_finite() && v > 0.0) {
                    return Err(ChainError::InvalidEntry { from: i, to: j, value: v });
                }
            }
            let q = gen.total_rate(i);
            if q <= 0.0 {
                return Err(ChainError::Absorbing { state: i });
            }
            let s: f64 = row.iter().map(|e| e.1).sum();
            if (q - s).abs() > RATE_TOL * q {
                return Err(ChainError::InvalidEntry { from: i, to: i, value: q });
            }
        }
        ChainKind::Discrete => {
            for &(j, v) in &row {
                if !(v.is_finite() && (0.0..=1.0 + RATE_TOL).contains(&v)) {
                    return Err(ChainError::InvalidEntry { from: i, to: j, value: v });
                }
            }
            let s: f64 = row.iter().map(|e| e.1).sum();
            if (s - 1.0).abs() > RATE_TOL {
                return Err(ChainError::RowSum { state: i, sum: s });
            }
        }
    }
    Ok(())
}

/// Validates every row with index ≤ n.
pub fn validate_prefix(gen: &dyn Generator, n: usize) -> Result<()> {
    (0..=effective_level(gen, n)).try_for_each(|i| validate_row(gen, i))
}

/// Jump-chain row Π_i· (continuous) or P_i· (discrete).
pub fn embedded_row(gen: &dyn Generator, i: usize) -> Result<Vec<(usize, f64)>> {
    let row = gen.row(i);
    match gen.kind() {
        ChainKind::Discrete => Ok(row),
        ChainKind::Continuous => {
            let q: f64 = row.iter().map(|e| e.1).sum();
            if q <= 0.0 {
                return Err(ChainError::Absorbing { state: i });
            }
            Ok(row.into_iter().map(|(j, v)| (j, v / q)).collect())
        }
    }
}

/// Embedded jump chain Π_ij = q_ij / q_i.
pub struct EmbeddedKernel<'a> {
    gen: &'a dyn Generator,
}

pub fn embedded_kernel(gen: &dyn Generator) -> EmbeddedKernel<'_> {
    EmbeddedKernel { gen }
}

impl EmbeddedKernel<'_> {
    pub fn row(&self, i: usize) -> Result<Vec<(usize, f64)>> {
        embedded_row(self.gen, i)
    }
}

/// Enumerates the first `capacity` states in level-major order. The capacity
/// must end exactly on a level boundary (or cover a finite state space).
pub fn enumerate_states(gen: &dyn Generator, capacity: usize) -> Result<Vec<Vec<u64>>> {
    if capacity == 0 {
        return Err(ChainError::ZeroCapacity);
    }
    let lat = gen.lattice();
    let cap = gen.state_count().map_or(capacity, |c| c.min(capacity));
    if gen.state_count() != Some(cap) {
        let level = lat.level_of(cap - 1);
        if lat.level_offset(level + 1) != cap {
            return Err(ChainError::CapacityExhausted { level, complete_states: lat.level_offset(level) });
        }
    }
    Ok((0..cap).map(|i| lat.unrank(i)).collect())
}

/// Finite nonempty target set H.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TargetSet(Vec<usize>);

impl TargetSet {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(ChainError::EmptyTarget);
        }
        members.sort_unstable();
        members.dedup();
        Ok(TargetSet(members))
    }

    pub fn root() -> Self {
        TargetSet(vec![0])
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> usize {
        *self.0.last().unwrap()
    }
}

impl Default for TargetSet {
    fn default() -> Self {
        Self::root()
    }
}

impl TryFrom<Vec<usize>> for TargetSet {
    type Error = ChainError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        TargetSet::new(v)
    }
}

impl From<TargetSet> for Vec<usize> {
    fn from(t: TargetSet) -> Self {
        t.0
    }
}

/// Inhomogeneity of a truncated system.
#[derive(Debug, Clone, Copy)]
pub enum SystemSource<'a> {
    /// g_i = 1/q_i: first moments of σ_H.
    Ordinary,
    /// Ladder step to moment `order` ≥ 2, with `previous[i]` = x_i^(order−1)
    /// for every state i ≤ N (H included).
    Ladder { order: usize, previous: &'a [f64] },
    /// g_i = 1/(q_i − λ), A scaled by q_i/(q_i − λ).
    Exponential { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SystemTag {
    Ordinary,
    Ladder { order: usize },
    Exponential { lambda: f64 },
}

/// Affine identity for an H row: x_h = Σ coef·x_unknown + source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRow {
    pub state: usize,
    pub coefs: Vec<(usize, f64)>,
    pub source: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSystem {
    pub level: usize,
    pub model: String,
    pub target: TargetSet,
    pub tag: SystemTag,
    /// State index of each unknown, increasing.
    pub unknowns: Vec<usize>,
    pub op: NonnegAffineOperator,
    pub h_rows: Vec<HRow>,
}

impl TruncatedSystem {
    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    /// Position of `state` among the unknowns.
    pub fn position(&self, state: usize) -> Option<usize> {
        self.unknowns.binary_search(&state).ok()
    }

    /// Values on H from the interior solution `x`.
    pub fn h_values(&self, x: &[f64]) -> Vec<(usize, f64)> {
        self.h_rows
            .iter()
            .map(|r| (r.state, r.coefs.iter().map(|&(p, c)| c * x[p]).sum::<f64>() + r.source))
            .collect()
    }
}

/// Builds the truncated system at level N (highest included state index).
pub fn build_truncated_system(
    gen: &dyn Generator,
    h: &TargetSet,
    n: usize,
    source: SystemSource<'_>,
) -> Result<TruncatedSystem> {
    let n = effective_level(gen, n);
    if h.max() > n {
        return Err(ChainError::TargetOutsideTruncation { state: h.max(), level: n });
    }
    let discrete = gen.kind() == ChainKind::Discrete;
    let rates: Vec<f64> = (0..=n).map(|i| gen.total_rate(i)).collect();
    if let Some(i) = rates.iter().position(|q| !(*q > 0.0)) {
        return Err(ChainError::Absorbing { state: i });
    }
    let lambda = match source {
        SystemSource::Exponential { lambda } => {
            if !(lambda > 0.0) {
                return Err(ChainError::NonPositiveLambda(lambda));
            }
            let min_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
            if lambda >= min_rate {
                return Err(ChainError::LambdaTooLarge { lambda, min_rate });
            }
            Some(lambda)
        }
        SystemSource::Ladder { previous, .. } if previous.len() != n + 1 => {
            return Err(ChainError::SourceLength { got: previous.len(), expected: n + 1 });
        }
        _ => None,
    };
    let unknowns: Vec<usize> = (0..=n).filter(|i| !h.contains(*i)).collect();
    let mut pos = vec![usize::MAX; n + 1];
    for (p, &s) in unknowns.iter().enumerate() {
        pos[s] = p;
    }
    let row_of = |i: usize| -> Result<(Vec<(usize, f64)>, f64)> {
        let q = rates[i];
        let (scale, g) = match (source, lambda) {
            (SystemSource::Exponential { .. }, Some(l)) => (q / (q - l), 1.0 / (q - l)),
            (SystemSource::Ladder { order, previous }, _) => {
                if discrete {
                    (1.0, previous[i])
                } else {
                    (1.0, order as f64 / q * previous[i])
                }
            }
            _ => (1.0, 1.0 / q),
        };
        let entries = embedded_row(gen, i)?
            .into_iter()
            .filter(|&(j, _)| j <= n && pos[j] != usize::MAX)
            .map(|(j, p)| (pos[j], scale * p))
            .collect();
        Ok((entries, g))
    };
    let mut rows = Vec::with_capacity(unknowns.len());
    let mut g = Vec::with_capacity(unknowns.len());
    for &i in &unknowns {
        let (r, gi) = row_of(i)?;
        rows.push(r);
        g.push(gi);
    }
    let mut h_rows = Vec::with_capacity(h.members().len());
    for &s in h.members() {
        let (coefs, source) = row_of(s)?;
        h_rows.push(HRow { state: s, coefs, source });
    }
    let op = NonnegAffineOperator::new(SparseMatrix::from_rows(rows), g)
        .map_err(|e| ChainError::ModelFile(e.to_string()))?;
    let tag = match source {
        SystemSource::Ordinary => SystemTag::Ordinary,
        SystemSource::Ladder { order, .. } => SystemTag::Ladder { order },
        SystemSource::Exponential { lambda } => SystemTag::Exponential { lambda },
    };
    Ok(TruncatedSystem { level: n, model: gen.name(), target: h.clone(), tag, unknowns, op, h_rows })
}

/// Finite chain given by explicit triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitChain {
    pub kind: ChainKind,
    rows: Vec<Vec<(usize, f64)>>,
    label: String,
}

impl ExplicitChain {
    pub fn new(states: usize, triplets: &[(usize, usize, f64)], kind: ChainKind) -> Result<Self> {
        if states == 0 {
            return Err(ChainError::ZeroCapacity);
        }
        let mut rows = vec![Vec::<(usize, f64)>::new(); states];
        for &(i, j, v) in triplets {
            if i >= states || j >= states {
                return Err(ChainError::OutOfRange { state: i.max(j), size: states });
            }
            if v == 0.0 {
                continue;
            }
            if kind == ChainKind::Continuous && i == j {
                return Err(ChainError::InvalidEntry { from: i, to: j, value: v });
            }
            match rows[i].iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1 += v,
                None => rows[i].push((j, v)),
            }
        }
        for r in rows.iter_mut() {
            r.sort_by_key(|e| e.0);
        }
        let c = ExplicitChain { kind, rows, label: format!("explicit({states})") };
        validate_prefix(&c, states - 1)?;
        Ok(c)
    }

    pub fn two_state(a: f64, b: f64) -> Result<Self> {
        Self::new(2, &[(0, 1, a), (1, 0, b)], ChainKind::Continuous)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl Generator for ExplicitChain {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn kind(&self) -> ChainKind {
        self.kind
    }
    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        self.rows.get(i).cloned().unwrap_or_default()
    }
    fn state_count(&self) -> Option<usize> {
        Some(self.rows.len())
    }
}
