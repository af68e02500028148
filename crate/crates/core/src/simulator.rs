//! Monte Carlo return times, independent of the linear-algebra path.
//!
//! Trajectory k of an estimate runs on ChaCha8 stream k of the seed, so the
//! sample set does not depend on thread scheduling. Sums are pairwise over the
//! stream index.

use crate::chain::{embedded_row, ChainError, ChainKind, Generator, TargetSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("all {0} samples were censored")]
    AllCensored(usize),
    #[error("rate {0} must be positive")]
    BadLambda(f64),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub const MIN_SAMPLES: usize = 100;
pub const DEFAULT_MAX_JUMPS: u64 = 10_000_000;
/// Censored fraction above which an estimate is flagged.
pub const CENSOR_FLAG_FRACTION: f64 = 0.01;
/// An exponential estimate is refused when one sample carries more than this
/// share of the sum.
pub const TOP_SAMPLE_SHARE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub max_jumps: u64,
    /// Largest state index a trajectory may visit; `None` means no limit
    /// beyond the state space.
    pub capacity: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { max_jumps: DEFAULT_MAX_JUMPS, capacity: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeSample {
    /// σ_H, or the time reached when censored.
    pub value: f64,
    pub jumps: u64,
    /// The trajectory left the enumeration capacity.
    pub truncation_hit: bool,
    /// The jump budget ran out.
    pub budget_hit: bool,
}

impl ReturnTimeSample {
    pub fn censored(&self) -> bool {
        self.truncation_hit || self.budget_hit
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn run(gen: &dyn Generator, h: &TargetSet, start: usize, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<ReturnTimeSample> {
    let discrete = gen.kind() == ChainKind::Discrete;
    let capacity = match (cfg.capacity, gen.state_count()) {
        (Some(c), _) => c,
        (None, Some(n)) => n - 1,
        (None, None) => usize::MAX,
    };
    let mut state = start;
    let mut time = 0.0;
    let mut jumps = 0u64;
    loop {
        if jumps >= cfg.max_jumps {
            return Ok(ReturnTimeSample { value: time, jumps, truncation_hit: false, budget_hit: true });
        }
        let row = embedded_row(gen, state)?;
        if discrete {
            time += 1.0;
        } else {
            let q: f64 = gen.total_rate(state);
            let u: f64 = rng.gen();
            time += -(1.0 - u).ln() / q;
        }
        let total: f64 = row.iter().map(|e| e.1).sum();
        let mut u = rng.gen::<f64>() * total;
        let mut next = row.last().map_or(state, |e| e.0);
        for &(j, p) in &row {
            if u < p {
                next = j;
                break;
            }
            u -= p;
        }
        state = next;
        jumps += 1;
        if state > capacity {
            return Ok(ReturnTimeSample { value: time, jumps, truncation_hit: true, budget_hit: false });
        }
        if h.contains(state) {
            return Ok(ReturnTimeSample { value: time, jumps, truncation_hit: false, budget_hit: false });
        }
    }
}

/// One σ_H from `start` (first H-entry at or after the first jump).
pub fn sample_return_time(gen: &dyn Generator, h: &TargetSet, start: usize, seed: u64, cfg: &SimConfig) -> Result<ReturnTimeSample> {
    run(gen, h, start, cfg, &mut stream_rng(seed, 0))
}

/// Samples 0..n on streams 0..n of `seed`.
pub fn sample_many(
    gen: &dyn Generator,
    h: &TargetSet,
    start: usize,
    n: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<Vec<ReturnTimeSample>> {
    (0..n).into_par_iter().map(|k| run(gen, h, start, cfg, &mut stream_rng(seed, k as u64))).collect()
}

/// Pairwise sum; the split points depend only on the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: usize,
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
    pub censored: usize,
    /// The two halves of the sample disagree beyond 3 combined SE.
    pub heavy_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpEstimate {
    pub lambda: f64,
    /// Estimate of (E e^{λσ} − 1)/λ; absent when refused.
    pub mean: Option<f64>,
    pub se: Option<f64>,
    pub top_share: f64,
    pub refused: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub schema: u32,
    pub start: usize,
    pub seed: u64,
    pub samples: usize,
    pub censored: usize,
    pub censored_fraction: f64,
    /// More than 1% of trajectories were censored.
    pub censor_flag: bool,
    pub polynomial: Vec<MomentEstimate>,
    pub exponential: Vec<ExpEstimate>,
}

fn halves_disagree(v: &[f64]) -> bool {
    let (a, b) = v.split_at(v.len() / 2);
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    let ((ma, sa), (mb, sb)) = (mean_se(a), mean_se(b));
    (ma - mb).abs() > 3.0 * (sa * sa + sb * sb).sqrt()
}

/// E σ_H^ℓ for each ℓ in `orders` and (E e^{λσ_H} − 1)/λ for each λ, from
/// the uncensored samples.
#[allow(clippy::too_many_arguments)]
pub fn estimate_moments(
    gen: &dyn Generator,
    h: &TargetSet,
    start: usize,
    orders: &[usize],
    lambdas: &[f64],
    n_samples: usize,
    seed: u64,
    cfg: &SimConfig,
) -> Result<MomentEstimates> {
    if n_samples < MIN_SAMPLES {
        return Err(SimError::TooFewSamples { got: n_samples, min: MIN_SAMPLES });
    }
    if let Some(&l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(SimError::BadLambda(l));
    }
    let all = sample_many(gen, h, start, n_samples, seed, cfg)?;
    let values: Vec<f64> = all.iter().filter(|s| !s.censored()).map(|s| s.value).collect();
    let censored = n_samples - values.len();
    if values.is_empty() {
        return Err(SimError::AllCensored(n_samples));
    }
    let polynomial = orders
        .iter()
        .map(|&order| {
            let v: Vec<f64> = values.iter().map(|x| x.powi(order as i32)).collect();
            let (mean, se) = mean_se(&v);
            MomentEstimate { order, mean, se, samples: v.len(), censored, heavy_tail: order >= 2 && halves_disagree(&v) }
        })
        .collect();
    let exponential = lambdas
        .iter()
        .map(|&lambda| {
            let v: Vec<f64> = values.iter().map(|x| (lambda * x).exp_m1() / lambda).collect();
            let sum = pairwise_sum(&v);
            let top = v.iter().copied().fold(0.0, f64::max);
            let top_share = if sum > 0.0 { top / sum } else { 0.0 };
            let refused = if !sum.is_finite() {
                Some("e^{λσ} overflows".to_string())
            } else if top_share > TOP_SAMPLE_SHARE {
                Some(format!("largest sample carries {:.1}% of the sum", 100.0 * top_share))
            } else {
                None
            };
            let (mean, se) = if refused.is_none() {
                let (m, s) = mean_se(&v);
                (Some(m), Some(s))
            } else {
                (None, None)
            };
            ExpEstimate { lambda, mean, se, top_share, refused }
        })
        .collect();
    let censored_fraction = censored as f64 / n_samples as f64;
    Ok(MomentEstimates {
        schema: 1,
        start,
        seed,
        samples: n_samples,
        censored,
        censored_fraction,
        censor_flag: censored_fraction > CENSOR_FLAG_FRACTION,
        polynomial,
        exponential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ExplicitChain;
    use crate::zoo::{AlphaFamily, BirthDeathGamma, Catastrophe};

    fn within(est: f64, se: f64, exact: f64, k: f64) -> bool {
        (est - exact).abs() <= k * se
    }

    #[test]
    fn two_state_moments() {
        let g = ExplicitChain::two_state(1.0, 1.0).unwrap();
        let h = TargetSet::root();
        let r = estimate_moments(&g, &h, 0, &[1, 2], &[0.5], 100_000, 7, &SimConfig::default()).unwrap();
        assert!(within(r.polynomial[0].mean, r.polynomial[0].se, 2.0, 3.0));
        assert!(within(r.polynomial[1].mean, r.polynomial[1].se, 6.0, 3.0));
        let e = &r.exponential[0];
        assert!(within(e.mean.unwrap(), e.se.unwrap(), 6.0, 3.0), "{e:?}");
        let from_one = estimate_moments(&g, &h, 1, &[1], &[], 100_000, 8, &SimConfig::default()).unwrap();
        assert!(within(from_one.polynomial[0].mean, from_one.polynomial[0].se, 1.0, 3.0));
    }

    #[test]
    fn catastrophe_constant_from_one() {
        let c = Catastrophe::new(AlphaFamily::Constant { c: 1.0 }).unwrap();
        let r = estimate_moments(&c, &TargetSet::root(), 1, &[1], &[], 50_000, 3, &SimConfig::default()).unwrap();
        assert!(within(r.polynomial[0].mean, r.polynomial[0].se, 1.0, 3.0));
    }

    #[test]
    fn seed_determinism_and_positivity() {
        let g = BirthDeathGamma::new(2.0).unwrap();
        let h = TargetSet::root();
        let a = sample_many(&g, &h, 0, 200, 11, &SimConfig::default()).unwrap();
        let b = sample_many(&g, &h, 0, 200, 11, &SimConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.value > 0.0 && s.jumps >= 1));
    }

    #[test]
    fn censoring_is_reported() {
        let g = BirthDeathGamma::new(0.5).unwrap();
        let cfg = SimConfig { max_jumps: 50, capacity: Some(20) };
        let r = estimate_moments(&g, &TargetSet::root(), 0, &[1], &[], 500, 1, &cfg).unwrap();
        assert!(r.censored > 0 && r.censor_flag);
        assert_eq!(r.polynomial[0].samples + r.censored, 500);
    }

    #[test]
    fn too_few_samples() {
        let g = ExplicitChain::two_state(1.0, 1.0).unwrap();
        assert!(matches!(
            estimate_moments(&g, &TargetSet::root(), 0, &[1], &[], 10, 1, &SimConfig::default()),
            Err(SimError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn pairwise_sum_matches() {
        let v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }
}
