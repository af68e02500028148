//! Built-in models and the model-file format.
//!
//! Every constructor validates its parameters and returns a shared
//! generator. Catalog entries pair a concrete parameter set with the
//! classification known for it, used by regression tests and `zoo list`.

pub mod level;

use crate::chain::{ChainError, ChainKind, ExplicitChain, Generator, SharedGenerator};
use crate::classifier::{ErgodicityReport, TierStatus};
use crate::lattice::Lattice;
use crate::single_birth::SingleBirthRates;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZooError {
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bad model file: {0}")]
    ModelFile(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

pub type Result<T> = std::result::Result<T, ZooError>;

fn invalid(msg: impl Into<String>) -> ZooError {
    ZooError::InvalidParameter(msg.into())
}

/// q_01 = 1; for i ≥ 1 birth and death rates i^γ.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathGamma {
    pub gamma: f64,
}

impl BirthDeathGamma {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(invalid("gamma must be finite"));
        }
        Ok(BirthDeathGamma { gamma })
    }

    fn rate(&self, i: usize) -> f64 {
        (i as f64).powf(self.gamma)
    }
}

impl Generator for BirthDeathGamma {
    fn name(&self) -> String {
        format!("birth_death_gamma(gamma={})", self.gamma)
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        if i == 0 {
            vec![(1, 1.0)]
        } else {
            let r = self.rate(i);
            vec![(i - 1, r), (i + 1, r)]
        }
    }

    fn single_birth(&self) -> Option<&dyn SingleBirthRates> {
        Some(self)
    }
}

impl SingleBirthRates for BirthDeathGamma {
    fn up(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.rate(n)
        }
    }

    fn below(&self, n: usize) -> Vec<(usize, f64)> {
        if n == 0 {
            Vec::new()
        } else {
            vec![(n - 1, self.rate(n))]
        }
    }
}

/// Catastrophe rates α_i, i ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AlphaFamily {
    /// 1/i^γ
    Power { gamma: f64 },
    /// 1/log^γ i for i ≥ 3, 1 below.
    LogPower { gamma: f64 },
    /// 1/(log log i)^γ for i ≥ 16, 1 below.
    LoglogPower { gamma: f64 },
    /// 1/i for odd i, 1 for even i.
    Alternating,
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// α_1, α_2, …; the last value repeats.
    Custom { alpha: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl AlphaFamily {
    pub fn alpha(&self, i: usize) -> f64 {
        let x = i as f64;
        match self {
            AlphaFamily::Power { gamma } => x.powf(-gamma),
            AlphaFamily::LogPower { gamma } => {
                if i < 3 {
                    1.0
                } else {
                    x.ln().powf(-gamma)
                }
            }
            AlphaFamily::LoglogPower { gamma } => {
                if i < 16 {
                    1.0
                } else {
                    x.ln().ln().powf(-gamma)
                }
            }
            AlphaFamily::Alternating => {
                if i % 2 == 1 {
                    1.0 / x
                } else {
                    1.0
                }
            }
            AlphaFamily::Constant { c } => *c,
            AlphaFamily::Custom { alpha } => alpha[(i - 1).min(alpha.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AlphaFamily::Power { gamma } | AlphaFamily::LogPower { gamma } | AlphaFamily::LoglogPower { gamma } => {
                if !gamma.is_finite() {
                    return Err(invalid("gamma must be finite"));
                }
            }
            AlphaFamily::Constant { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(invalid("constant alpha must be positive"));
                }
            }
            AlphaFamily::Custom { alpha } => {
                if alpha.is_empty() || alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                    return Err(invalid("custom alpha must be a nonempty list of nonnegative numbers"));
                }
                if *alpha.last().unwrap() <= 0.0 {
                    return Err(invalid("last custom alpha must be positive (it repeats forever)"));
                }
            }
            AlphaFamily::Alternating => {}
        }
        Ok(())
    }

    fn label(&self) -> String {
        match self {
            AlphaFamily::Power { gamma } => format!("power,gamma={gamma}"),
            AlphaFamily::LogPower { gamma } => format!("log_power,gamma={gamma}"),
            AlphaFamily::LoglogPower { gamma } => format!("loglog_power,gamma={gamma}"),
            AlphaFamily::Alternating => "alternating".into(),
            AlphaFamily::Constant { c } => format!("constant,c={c}"),
            AlphaFamily::Custom { alpha } => format!("custom,{} values", alpha.len()),
        }
    }
}

/// q_{i,i+1} = i + 1 (i ≥ 0), q_{i0} = α_i (i ≥ 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Catastrophe {
    pub family: AlphaFamily,
}

impl Catastrophe {
    pub fn new(family: AlphaFamily) -> Result<Self> {
        family.validate()?;
        Ok(Catastrophe { family })
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.family.alpha(i)
    }
}

impl Generator for Catastrophe {
    fn name(&self) -> String {
        format!("catastrophe({})", self.family.label())
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let mut r = Vec::with_capacity(2);
        if i > 0 {
            let a = self.alpha(i);
            if a > 0.0 {
                r.push((0, a));
            }
        }
        r.push((i + 1, (i + 1) as f64));
        r
    }

    fn single_birth(&self) -> Option<&dyn SingleBirthRates> {
        Some(self)
    }
}

impl SingleBirthRates for Catastrophe {
    fn up(&self, n: usize) -> f64 {
        (n + 1) as f64
    }

    fn below(&self, n: usize) -> Vec<(usize, f64)> {
        if n == 0 {
            return Vec::new();
        }
        let a = self.alpha(n);
        if a > 0.0 {
            vec![(0, a)]
        } else {
            Vec::new()
        }
    }
}

/// z_0 = 0, z_1 = −1, z_{i+1} = z_i/p_i with p_i = (i+1)/(i+1+α_i): the
/// embedded chain's harmonic function off 0, bounded when Σ α_i/i < ∞.
pub fn catastrophe_transience_certificate(c: &Catastrophe, len: usize) -> Vec<f64> {
    let mut z = vec![0.0; len.max(2)];
    z[1] = -1.0;
    for i in 1..z.len() - 1 {
        let p = (i + 1) as f64 / ((i + 1) as f64 + c.alpha(i));
        z[i + 1] = z[i] / p;
    }
    z
}

/// Single-birth rates from finite tables, extended periodically by the last
/// row: up(n) = up[m−1], and the last row's targets keep their offset below
/// n (targets at 0 stay at 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBirthCustom {
    pub up: Vec<f64>,
    pub below: Vec<Vec<(usize, f64)>>,
}

impl SingleBirthCustom {
    pub fn new(up: Vec<f64>, mut below: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if up.is_empty() {
            return Err(invalid("up rates must be nonempty"));
        }
        if below.len() > up.len() {
            return Err(invalid("more below rows than up rates"));
        }
        below.resize(up.len(), Vec::new());
        for (n, &u) in up.iter().enumerate() {
            if !(u.is_finite() && u > 0.0) {
                return Err(invalid(format!("up rate at {n} must be positive")));
            }
            for &(k, r) in &below[n] {
                if k >= n || !(r.is_finite() && r > 0.0) {
                    return Err(invalid(format!("bad below entry ({k}, {r}) in row {n}")));
                }
            }
        }
        Ok(SingleBirthCustom { up, below })
    }
}

impl Generator for SingleBirthCustom {
    fn name(&self) -> String {
        format!("single_birth_custom({} rows)", self.up.len())
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let mut r = SingleBirthRates::below(self, i);
        r.push((i + 1, SingleBirthRates::up(self, i)));
        r
    }

    fn single_birth(&self) -> Option<&dyn SingleBirthRates> {
        Some(self)
    }
}

impl SingleBirthRates for SingleBirthCustom {
    fn up(&self, n: usize) -> f64 {
        self.up[n.min(self.up.len() - 1)]
    }

    fn below(&self, n: usize) -> Vec<(usize, f64)> {
        let m = self.up.len() - 1;
        if n <= m {
            return self.below[n].clone();
        }
        self.below[m].iter().map(|&(k, r)| (if k == 0 { 0 } else { n - (m - k) }, r)).collect()
    }
}

/// Nearest-neighbour ring kernel on `sites` sites.
fn ring_kernel(sites: usize) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; sites]; sites];
    if sites == 2 {
        p[0][1] = 1.0;
        p[1][0] = 1.0;
    } else if sites > 2 {
        for (u, row) in p.iter_mut().enumerate() {
            row[(u + 1) % sites] += 0.5;
            row[(u + sites - 1) % sites] += 0.5;
        }
    }
    p
}

fn validate_kernel(p: &[Vec<f64>], sites: usize, what: &str) -> Result<()> {
    if p.len() != sites || p.iter().any(|r| r.len() != sites) {
        return Err(invalid(format!("{what} must be {sites}x{sites}")));
    }
    for r in p {
        if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(format!("{what} entries must be nonnegative")));
        }
        let s: f64 = r.iter().sum();
        if sites > 1 && (s - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("{what} rows must sum to 1")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrusselParams {
    pub sites: usize,
    pub lambda: [f64; 4],
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p1: Option<Vec<Vec<f64>>>,
    pub p2: Option<Vec<Vec<f64>>>,
}

impl Default for BrusselParams {
    fn default() -> Self {
        BrusselParams { sites: 1, lambda: [1.0; 4], a: Vec::new(), b: Vec::new(), p1: None, p2: None }
    }
}

impl BrusselParams {
    /// λ₁ Σ_u a(u)
    pub fn birth_total(&self) -> f64 {
        let a = if self.a.is_empty() { vec![1.0; self.sites] } else { self.a.clone() };
        self.lambda[0] * a.iter().sum::<f64>()
    }
}

/// Reaction-diffusion model on (Z_+²)^S. Coordinates are
/// [x₁(u₀), x₂(u₀), x₁(u₁), x₂(u₁), …].
#[derive(Debug, Clone, PartialEq)]
pub struct Brussel {
    pub params: BrusselParams,
    a: Vec<f64>,
    b: Vec<f64>,
    p1: Vec<Vec<f64>>,
    p2: Vec<Vec<f64>>,
    lattice: Lattice,
}

impl Brussel {
    pub fn new(params: BrusselParams) -> Result<Self> {
        let s = params.sites;
        if s == 0 || s > 8 {
            return Err(invalid("sites must be in 1..=8"));
        }
        if params.lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(invalid("lambda_1..lambda_4 must be positive"));
        }
        let fill = |v: &Vec<f64>, what: &str| -> Result<Vec<f64>> {
            let v = if v.is_empty() { vec![1.0; s] } else { v.clone() };
            if v.len() != s || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(invalid(format!("{what} must hold {s} positive values")));
            }
            Ok(v)
        };
        let a = fill(&params.a, "a")?;
        let b = fill(&params.b, "b")?;
        let p1 = params.p1.clone().unwrap_or_else(|| ring_kernel(s));
        let p2 = params.p2.clone().unwrap_or_else(|| ring_kernel(s));
        validate_kernel(&p1, s, "p1")?;
        validate_kernel(&p2, s, "p2")?;
        Ok(Brussel { lattice: Lattice::new(2 * s), params, a, b, p1, p2 })
    }
}

impl Generator for Brussel {
    fn name(&self) -> String {
        format!("brussel(sites={})", self.params.sites)
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let x = self.lattice.unrank(i);
        let [l1, l2, l3, l4] = self.params.lambda;
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut push = |y: &[u64], r: f64| {
            if r > 0.0 {
                out.push((self.lattice.rank(y), r));
            }
        };
        let s = self.params.sites;
        for u in 0..s {
            let (i1, i2) = (2 * u, 2 * u + 1);
            let (x1, x2) = (x[i1] as f64, x[i2] as f64);
            let mut y = x.clone();
            y[i1] += 1;
            push(&y, l1 * self.a[u]);
            if x[i1] >= 1 {
                let mut y = x.clone();
                y[i1] -= 1;
                y[i2] += 1;
                push(&y, l2 * self.b[u] * x1);
                let mut y = x.clone();
                y[i1] -= 1;
                push(&y, l4 * x1);
            }
            if x[i2] >= 1 && x[i1] >= 2 {
                let mut y = x.clone();
                y[i1] += 1;
                y[i2] -= 1;
                push(&y, l3 * x1 * (x1 - 1.0) / 2.0 * x2);
            }
            for v in 0..s {
                if v == u {
                    continue;
                }
                for (k, p) in [(0usize, &self.p1), (1, &self.p2)] {
                    let (from, to) = (2 * u + k, 2 * v + k);
                    if x[from] >= 1 && p[u][v] > 0.0 {
                        let mut y = x.clone();
                        y[from] -= 1;
                        y[to] += 1;
                        push(&y, x[from] as f64 * p[u][v]);
                    }
                }
            }
        }
        out
    }

    fn lattice(&self) -> Lattice {
        self.lattice
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGammaParams {
    #[serde(default = "two")]
    pub sites: usize,
    pub gamma: f64,
    #[serde(default)]
    pub p: Option<Vec<Vec<f64>>>,
}

fn two() -> usize {
    2
}

/// Multi-site version of the birth–death γ model on Z_+^S: from θ each e_u
/// at rate 1; otherwise x ± e_u at rate x(u)^γ (only where x(u) ≥ 1) and
/// x − e_u + e_v at rate x(u) p(u, v).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGamma {
    pub params: MultiGammaParams,
    p: Vec<Vec<f64>>,
    lattice: Lattice,
}

impl MultiGamma {
    pub fn new(params: MultiGammaParams) -> Result<Self> {
        let s = params.sites;
        if s == 0 || s > 8 {
            return Err(invalid("sites must be in 1..=8"));
        }
        if !params.gamma.is_finite() {
            return Err(invalid("gamma must be finite"));
        }
        let p = params.p.clone().unwrap_or_else(|| ring_kernel(s));
        validate_kernel(&p, s, "p")?;
        Ok(MultiGamma { lattice: Lattice::new(s), params, p })
    }
}

impl Generator for MultiGamma {
    fn name(&self) -> String {
        format!("multi_gamma(sites={},gamma={})", self.params.sites, self.params.gamma)
    }

    fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let x = self.lattice.unrank(i);
        let s = self.params.sites;
        let mut out = Vec::new();
        if x.iter().all(|&c| c == 0) {
            for u in 0..s {
                let mut y = x.clone();
                y[u] = 1;
                out.push((self.lattice.rank(&y), 1.0));
            }
            return out;
        }
        for u in 0..s {
            if x[u] == 0 {
                continue;
            }
            let r = (x[u] as f64).powf(self.params.gamma);
            let mut y = x.clone();
            y[u] += 1;
            out.push((self.lattice.rank(&y), r));
            let mut y = x.clone();
            y[u] -= 1;
            out.push((self.lattice.rank(&y), r));
            for v in 0..s {
                if v != u && self.p[u][v] > 0.0 {
                    let mut y = x.clone();
                    y[u] -= 1;
                    y[v] += 1;
                    out.push((self.lattice.rank(&y), x[u] as f64 * self.p[u][v]));
                }
            }
        }
        out
    }

    fn lattice(&self) -> Lattice {
        self.lattice
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BirthDeathParams {
    gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TwoStateParams {
    #[serde(default = "one")]
    a: f64,
    #[serde(default = "one")]
    b: f64,
}

pub const BUILTIN_NAMES: [&str; 6] =
    ["birth_death_gamma", "catastrophe", "single_birth_custom", "brussel", "multi_gamma", "two_state"];

fn parse<T: serde::de::DeserializeOwned>(name: &str, params: &Value) -> Result<T> {
    serde_json::from_value(params.clone()).map_err(|e| invalid(format!("{name}: {e}")))
}

/// Builds a named model from a JSON parameter object.
pub fn builtin(name: &str, params: &Value) -> Result<SharedGenerator> {
    let params = if params.is_null() { json!({}) } else { params.clone() };
    Ok(match name {
        "birth_death_gamma" => Arc::new(BirthDeathGamma::new(parse::<BirthDeathParams>(name, &params)?.gamma)?),
        "catastrophe" => Arc::new(Catastrophe::new(parse::<AlphaFamily>(name, &params)?)?),
        "single_birth_custom" => {
            let c: SingleBirthCustom = parse(name, &params)?;
            Arc::new(SingleBirthCustom::new(c.up, c.below)?)
        }
        "brussel" => Arc::new(Brussel::new(parse(name, &params)?)?),
        "multi_gamma" => Arc::new(MultiGamma::new(parse(name, &params)?)?),
        "two_state" => {
            let p: TwoStateParams = parse(name, &params)?;
            Arc::new(ExplicitChain::two_state(p.a, p.b)?)
        }
        other => return Err(ZooError::UnknownModel(other.to_string())),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitSpec {
    pub states: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    #[serde(default = "continuous")]
    pub kind: ChainKind,
}

fn continuous() -> ChainKind {
    ChainKind::Continuous
}

/// Model file: {"builtin": name, "params": {...}} or {"explicit": {...}}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: Value,
    },
    Explicit {
        explicit: ExplicitSpec,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ZooError::ModelFile(e.to_string()))
    }

    pub fn build(&self) -> Result<SharedGenerator> {
        match self {
            ModelSpec::Builtin { builtin: name, params } => builtin(name, params),
            ModelSpec::Explicit { explicit } => {
                Ok(Arc::new(ExplicitChain::new(explicit.states, &explicit.triplets, explicit.kind)?))
            }
        }
    }
}

/// Known classification; `None` where no claim is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AssertedClass {
    pub recurrent: Option<bool>,
    pub ergodic: Option<bool>,
    pub exponential: Option<bool>,
    pub strong: Option<bool>,
}

impl AssertedClass {
    pub const STRONG: AssertedClass =
        AssertedClass { recurrent: Some(true), ergodic: Some(true), exponential: Some(true), strong: Some(true) };
    pub const TRANSIENT: AssertedClass =
        AssertedClass { recurrent: Some(false), ergodic: Some(false), exponential: Some(false), strong: Some(false) };
    pub const NULL_RECURRENT: AssertedClass =
        AssertedClass { recurrent: Some(true), ergodic: Some(false), exponential: Some(false), strong: Some(false) };
    pub const ERGODIC_NOT_EXP: AssertedClass =
        AssertedClass { recurrent: Some(true), ergodic: Some(true), exponential: Some(false), strong: Some(false) };

    /// Tiers of the report that contradict this class.
    pub fn contradictions(&self, r: &ErgodicityReport) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, claim: Option<bool>, status: TierStatus| match (claim, status) {
            (Some(true), TierStatus::Fails) => out.push(format!("{name}: expected to hold, report says fails")),
            (Some(false), TierStatus::Holds) => out.push(format!("{name}: expected to fail, report says holds")),
            _ => {}
        };
        check("recurrent", self.recurrent, r.recurrent.status);
        check("ergodic", self.ergodic, r.ergodic.status);
        check("exponentially_ergodic", self.exponential, r.exponentially_ergodic.tier.status);
        check("strongly_ergodic", self.strong, r.strongly_ergodic.status);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooEntry {
    pub id: String,
    pub model: String,
    pub params: Value,
    pub asserted: AssertedClass,
    pub single_birth: bool,
    pub note: String,
}

impl ZooEntry {
    pub fn build(&self) -> Result<SharedGenerator> {
        builtin(&self.model, &self.params)
    }
}

fn entry(id: &str, model: &str, params: Value, asserted: AssertedClass, single_birth: bool, note: &str) -> ZooEntry {
    ZooEntry { id: id.into(), model: model.into(), params, asserted, single_birth, note: note.into() }
}

/// Birth–death γ model: recurrent; ergodic iff γ > 1; strongly ergodic iff γ > 2.
pub fn birth_death_class(gamma: f64) -> AssertedClass {
    AssertedClass {
        recurrent: Some(true),
        ergodic: Some(gamma > 1.0),
        exponential: if gamma <= 1.0 { Some(false) } else { None },
        strong: Some(gamma > 2.0),
    }
}

pub fn catalog() -> Vec<ZooEntry> {
    let mut v = Vec::new();
    for g in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
        v.push(entry(
            &format!("bd_gamma_{g}"),
            "birth_death_gamma",
            json!({ "gamma": g }),
            birth_death_class(g),
            true,
            "ergodic iff gamma > 1, strongly ergodic iff gamma > 2",
        ));
    }
    let cat = |id: &str, fam: Value, a: AssertedClass, note: &str| entry(id, "catastrophe", fam, a, true, note);
    v.push(cat("cat_power_1", json!({"family": "power", "gamma": 1.0}), AssertedClass::TRANSIENT, "sum alpha_i/i < inf"));
    v.push(cat("cat_power_2", json!({"family": "power", "gamma": 2.0}), AssertedClass::TRANSIENT, "sum alpha_i/i < inf"));
    v.push(cat(
        "cat_log_0.5",
        json!({"family": "log_power", "gamma": 0.5}),
        AssertedClass::ERGODIC_NOT_EXP,
        "ergodic, alpha_i -> 0 rules out exponential ergodicity",
    ));
    v.push(cat("cat_log_1", json!({"family": "log_power", "gamma": 1.0}), AssertedClass::NULL_RECURRENT, "null recurrent"));
    v.push(cat("cat_log_2", json!({"family": "log_power", "gamma": 2.0}), AssertedClass::TRANSIENT, "transient"));
    v.push(cat(
        "cat_loglog_1",
        json!({"family": "loglog_power", "gamma": 1.0}),
        AssertedClass::ERGODIC_NOT_EXP,
        "ergodic, not exponentially ergodic",
    ));
    v.push(cat("cat_alternating", json!({"family": "alternating"}), AssertedClass::STRONG, "strongly ergodic"));
    v.push(cat("cat_constant", json!({"family": "constant", "c": 1.0}), AssertedClass::STRONG, "strongly ergodic"));
    v.push(entry(
        "brussel_1",
        "brussel",
        json!({"sites": 1}),
        AssertedClass { recurrent: Some(true), ergodic: Some(true), exponential: Some(true), strong: Some(false) },
        false,
        "exponentially ergodic, not strongly ergodic",
    ));
    for g in [1.0, 2.0] {
        v.push(entry(
            &format!("multi_gamma_{g}"),
            "multi_gamma",
            json!({"sites": 2, "gamma": g}),
            AssertedClass { recurrent: None, ergodic: if g <= 1.0 { Some(false) } else { None }, exponential: None, strong: Some(false) },
            false,
            "not strongly ergodic for gamma <= 2, not ergodic for gamma <= 1",
        ));
    }
    v
}
