//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when a criterion fails that is not listed in `KNOWN_RED`.
//!
//! Run with `cargo test --release --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use ergoclass::chain::{build_truncated_system, ChainKind, ExplicitChain, Generator, SystemSource, TargetSet};
use ergoclass::classifier::{classify, ClassifyConfig, TierStatus, VerdictRule, VerdictState};
use ergoclass::moments::{moment_ladder, pow2_schedule, rate_bound, solve_truncated, MomentTable};
use ergoclass::simulator::{estimate_moments, SimConfig};
use ergoclass::single_birth::{
    build_tableau, catastrophe_recurrence, ergodicity_explicit, recurrence_explicit, strong_explicit,
    truncated_closed_form,
};
use ergoclass::solver::{solve_direct, solve_iterative};
use ergoclass::witness::{
    gen_nonergodic_witness, gen_nonexp_witness, gen_nonstrong_witness, verify_witness, NonExpOptions, NonExpOutcome,
};
use ergoclass::zoo::level::{
    brussel_level_inequality_check, multi_gamma_level_check, BrusselFamily, BrusselRates, MultiGammaFamily,
};
use ergoclass::zoo::{catalog, AlphaFamily, BirthDeathGamma, Catastrophe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Runtime budget per γ in criterion 1, seconds.
const BD_SECONDS: f64 = 60.0;
/// Two-state closed forms.
const CLOSED_TOL: f64 = 1e-12;
/// d_sup(10^6) distance from 1.
const DSUP_TOL: f64 = 2.1e-6;
/// Strong partial sums against 1.
const PARTIAL_SUM_TOL: f64 = 1e-9;
/// Componentwise monotonicity slack.
const MONOTONE_TOL: f64 = 1e-12;
/// Iterative vs direct, relative.
const SOLVER_TOL: f64 = 1e-9;
/// Simulator agreement in standard errors.
const SIM_SE: f64 = 4.0;
const SIM_SAMPLES: usize = 100_000;
const WITNESS_TOL: f64 = 1e-9;
/// Per level check, seconds.
const LEVEL_SECONDS: f64 = 10.0;
/// Closed form vs direct, relative.
const IDENTITY_TOL: f64 = 1e-9;

/// Criteria expected to fail; the reason is recorded in the decision notes.
const KNOWN_RED: &[&str] = &["8c"];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn status_of(state: &VerdictState) -> TierStatus {
    match state {
        VerdictState::Converged { .. } => TierStatus::Holds,
        VerdictState::Diverging { .. } => TierStatus::Fails,
        VerdictState::Inconclusive => TierStatus::Undetermined,
    }
}

fn root() -> TargetSet {
    TargetSet::root()
}

fn criterion_1() -> Check {
    let mut notes = Vec::new();
    for g in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let t = Instant::now();
        let m = BirthDeathGamma::new(g).map_err(|e| e.to_string())?;
        let cfg = ClassifyConfig::default().with_schedule(pow2_schedule(4, 15));
        let r = classify(&m, &root(), 3, &cfg).map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        ensure(secs <= BD_SECONDS, || format!("gamma {g}: {secs:.1} s"))?;
        if g <= 1.0 {
            ensure(r.ergodic.verdict.state.is_diverging(), || format!("gamma {g}: ergodic {}", r.ergodic.verdict.state))?;
        } else if g <= 2.0 {
            ensure(r.ergodic.verdict.state.is_converged(), || format!("gamma {g}: ergodic {}", r.ergodic.verdict.state))?;
            ensure(r.strongly_ergodic.verdict.state.is_diverging(), || {
                format!("gamma {g}: strong {}", r.strongly_ergodic.verdict.state)
            })?;
        } else {
            for (name, tier) in r.tiers() {
                ensure(tier.status == TierStatus::Holds, || format!("gamma {g}: {name} is {:?}", tier.status))?;
            }
        }
        notes.push(format!("{g}:{secs:.1}s"));
    }
    Ok(notes.join(" "))
}

fn criterion_2() -> Check {
    let rule = VerdictRule::default();
    let mut checked = 0;
    for entry in catalog().into_iter().filter(|e| e.single_birth) {
        let gen = entry.build().map_err(|e| e.to_string())?;
        let sb = gen.single_birth().ok_or_else(|| format!("{}: no single-birth rates", entry.id))?;
        let t = build_tableau(sb, 1 << 17).map_err(|e| e.to_string())?;
        let d = ergodicity_explicit(&t, &rule).map_err(|e| e.to_string())?;
        let cfg = ClassifyConfig { skip_exponential: true, ..ClassifyConfig::default() };
        let r = classify(gen.as_ref(), &root(), 1, &cfg).map_err(|e| e.to_string())?;
        let explicit_erg = status_of(&d.verdict.state);
        ensure(explicit_erg == r.ergodic.status, || {
            format!("{}: explicit ergodic {explicit_erg:?}, sweep {:?}", entry.id, r.ergodic.status)
        })?;
        let explicit_strong = if d.verdict.state.is_converged() {
            status_of(&strong_explicit(&t, &d, &rule).map_err(|e| e.to_string())?.verdict.state)
        } else {
            explicit_erg
        };
        ensure(explicit_strong == r.strongly_ergodic.status, || {
            format!("{}: explicit strong {explicit_strong:?}, sweep {:?}", entry.id, r.strongly_ergodic.status)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} models, 0 disagreements"))
}

fn catastrophe(fam: AlphaFamily) -> Result<Catastrophe, String> {
    Catastrophe::new(fam).map_err(|e| e.to_string())
}

fn criterion_3() -> Check {
    const K: usize = 1 << 17;
    let rule = VerdictRule::default();
    let explicit = |c: &Catastrophe| -> Result<_, String> {
        let t = build_tableau(c.single_birth().unwrap(), K).map_err(|e| e.to_string())?;
        let rec = recurrence_explicit(&t, &rule).map_err(|e| e.to_string())?;
        let erg = ergodicity_explicit(&t, &rule).map_err(|e| e.to_string())?;
        Ok((t, rec, erg))
    };

    let c = catastrophe(AlphaFamily::Power { gamma: 1.0 })?;
    let (_, rec, _) = explicit(&c)?;
    let cat = catastrophe_recurrence(&|i| c.alpha(i), K, &rule).map_err(|e| e.to_string())?;
    ensure(rec.verdict.state.is_converged() && cat.verdict.state.is_converged(), || {
        format!("power 1: recurrence {} / {}", rec.verdict.state, cat.verdict.state)
    })?;

    let c = catastrophe(AlphaFamily::LogPower { gamma: 0.5 })?;
    let (_, _, erg) = explicit(&c)?;
    ensure(erg.verdict.state.is_converged(), || format!("log 0.5: ergodic {}", erg.verdict.state))?;
    match gen_nonexp_witness(&c, &root(), 4, &NonExpOptions::default()).map_err(|e| e.to_string())? {
        NonExpOutcome::Witness { sequence, info, .. } => {
            let rep = verify_witness(&c, &root(), &sequence, WITNESS_TOL, None).map_err(|e| e.to_string())?;
            ensure(!info.is_empty() && rep.max_violation <= WITNESS_TOL, || {
                format!("log 0.5: {} terms, max violation {:e}", info.len(), rep.max_violation)
            })?;
            for i in &info {
                ensure(i.lambda <= 1.0 / i.n as f64, || format!("log 0.5: lambda {} at n={}", i.lambda, i.n))?;
            }
        }
        NonExpOutcome::NoWitness { n, .. } => return Err(format!("log 0.5: no witness at n={n}")),
    }

    let c = catastrophe(AlphaFamily::LogPower { gamma: 1.0 })?;
    let (_, rec, erg) = explicit(&c)?;
    ensure(rec.verdict.state.is_diverging() && erg.verdict.state.is_diverging(), || {
        format!("log 1: recurrence sum {}, d {}", rec.verdict.state, erg.verdict.state)
    })?;

    for (label, fam) in [("constant", AlphaFamily::Constant { c: 1.0 }), ("alternating", AlphaFamily::Alternating)] {
        let c = catastrophe(fam)?;
        let (t, rec, erg) = explicit(&c)?;
        ensure(rec.verdict.state.is_diverging() && erg.verdict.state.is_converged(), || {
            format!("{label}: recurrence sum {}, d {}", rec.verdict.state, erg.verdict.state)
        })?;
        let s = strong_explicit(&t, &erg, &rule).map_err(|e| e.to_string())?;
        ensure(s.verdict.state.is_converged(), || format!("{label}: strong {}", s.verdict.state))?;
    }
    Ok("transient / ergodic non-exp / null recurrent / strong x2".into())
}

fn h_value(gen: &dyn Generator, source: SystemSource) -> Result<f64, String> {
    let sys = build_truncated_system(gen, &root(), 1, source).map_err(|e| e.to_string())?;
    let x = solve_direct(&sys.op).map_err(|e| e.to_string())?.x;
    Ok(sys.h_values(&x)[0].1)
}

fn criterion_4() -> Check {
    let m = ExplicitChain::two_state(1.0, 1.0).map_err(|e| e.to_string())?;
    let sys = build_truncated_system(&m, &root(), 1, SystemSource::Ordinary).map_err(|e| e.to_string())?;
    let x = solve_direct(&sys.op).map_err(|e| e.to_string())?.x;
    let e1 = x[0];
    let e0 = sys.h_values(&x)[0].1;
    let e0_sq = h_value(&m, SystemSource::Ladder { order: 2, previous: &[e0, e1] })?;
    let e0_exp = h_value(&m, SystemSource::Exponential { lambda: 0.5 })?;
    for (name, got, want) in [("E_1", e1, 1.0), ("E_0", e0, 2.0), ("E_0 sq", e0_sq, 6.0), ("exp 0.5", e0_exp, 6.0)] {
        ensure((got - want).abs() <= CLOSED_TOL, || format!("{name}: {got} vs {want}"))?;
    }
    Ok(format!("{e1}, {e0}, {e0_sq}, {e0_exp}"))
}

fn criterion_5() -> Check {
    const K: usize = 1_000_000;
    let c = catastrophe(AlphaFamily::Constant { c: 1.0 })?;
    let t = build_tableau(c.single_birth().unwrap(), K).map_err(|e| e.to_string())?;
    for n in 1..=K {
        ensure((t.f0(n) - 0.5).abs() <= CLOSED_TOL && (t.d(n) - 0.5).abs() <= CLOSED_TOL, || {
            format!("n={n}: F={} d={}", t.f0(n), t.d(n))
        })?;
    }
    let dsup = t.d_sup(K);
    ensure((dsup - 1.0).abs() <= DSUP_TOL, || format!("d_sup = {dsup}"))?;
    let cf = truncated_closed_form(&c, 2).map_err(|e| e.to_string())?;
    ensure((cf.x[0] - 0.5).abs() <= CLOSED_TOL && (cf.x[1] - 0.25).abs() <= CLOSED_TOL, || {
        format!("closed form {:?}", cf.x)
    })?;
    let rule = VerdictRule::default();
    let erg = ergodicity_explicit(&t, &rule).map_err(|e| e.to_string())?;
    let s = strong_explicit(&t, &erg, &rule).map_err(|e| e.to_string())?;
    let worst = s.partial_sums.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    ensure(worst <= PARTIAL_SUM_TOL, || format!("partial sums off by {worst:e}"))?;
    Ok(format!("d_sup = {dsup}, closed form {:?}, partial sums within {worst:.1e}", cf.x))
}

/// First pair (state, values) where `next` is below `prev` by more than the slack.
fn regression(prev: &MomentTable, next: &MomentTable) -> Option<(usize, f64, f64)> {
    let lookup = |t: &MomentTable, s: usize| t.value(s);
    let states = prev.states.iter().copied().chain(prev.h_values.iter().map(|h| h.0));
    for s in states {
        if let (Some(a), Some(b)) = (lookup(prev, s), lookup(next, s)) {
            if a > b + MONOTONE_TOL * (1.0 + b.abs()) {
                return Some((s, a, b));
            }
        }
    }
    None
}

fn exp_table(gen: &dyn Generator, lambda: f64, n: usize) -> Option<MomentTable> {
    let sys = build_truncated_system(gen, &root(), n, SystemSource::Exponential { lambda }).ok()?;
    let (values, h_values) = solve_truncated(&sys).ok()?;
    Some(MomentTable { order: 0, level: sys.level, states: sys.unknowns.clone(), values, h_values })
}

fn criterion_6() -> Check {
    let mut compared = 0usize;
    for entry in catalog() {
        let gen = entry.build().map_err(|e| e.to_string())?;
        let gen = gen.as_ref();
        let schedule: Vec<usize> = if gen.lattice().dim > 1 {
            (3..=7).map(|l| ergoclass::chain::last_index_of_level(gen, 1 << l)).collect()
        } else {
            pow2_schedule(4, 14)
        };
        let lambda = 0.25 * rate_bound(gen, *schedule.last().unwrap()).lambda_prime;
        let mut prev: Option<(Vec<MomentTable>, Option<MomentTable>)> = None;
        for &n in &schedule {
            // An infinite solution ends the sweep; the levels before it still count.
            let ladder = moment_ladder(gen, &root(), 2, n).unwrap_or_default();
            let exp = exp_table(gen, lambda, n);
            if let Some((pl, pe)) = &prev {
                for (a, b) in pl.iter().zip(&ladder) {
                    if let Some((s, x, y)) = regression(a, b) {
                        return Err(format!("{} order {} state {s}: {x} then {y}", entry.id, a.order));
                    }
                    compared += 1;
                }
                if let (Some(a), Some(b)) = (pe, &exp) {
                    if let Some((s, x, y)) = regression(a, b) {
                        return Err(format!("{} exponential state {s}: {x} then {y}", entry.id));
                    }
                    compared += 1;
                }
            }
            prev = Some((ladder, exp));
        }
    }
    Ok(format!("{compared} consecutive table pairs nondecreasing"))
}

fn random_chain(seed: u64) -> Result<ExplicitChain, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=50usize);
    let discrete = seed % 4 == 3;
    let mut triplets = Vec::new();
    for i in 0..n {
        // The cycle edge keeps every state connected to 0.
        let mut targets = vec![(i + 1) % n];
        for _ in 0..rng.gen_range(0..4) {
            let j = rng.gen_range(0..n);
            if j != i {
                targets.push(j);
            }
        }
        targets.sort_unstable();
        targets.dedup();
        let rates: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
        if discrete {
            let stay: f64 = rng.gen_range(0.0..0.5);
            let total: f64 = rates.iter().sum();
            triplets.push((i, i, stay));
            for (j, r) in targets.iter().zip(&rates) {
                triplets.push((i, *j, (1.0 - stay) * r / total));
            }
        } else {
            for (j, r) in targets.iter().zip(&rates) {
                triplets.push((i, *j, *r));
            }
        }
    }
    let kind = if discrete { ChainKind::Discrete } else { ChainKind::Continuous };
    ExplicitChain::new(n, &triplets, kind).map_err(|e| e.to_string())
}

fn criterion_7() -> Check {
    let mut worst = 0.0f64;
    let mut worst_se = 0.0f64;
    for seed in 0..20u64 {
        let m = random_chain(seed)?;
        let n = m.state_count().unwrap() - 1;
        let sys = build_truncated_system(&m, &root(), n, SystemSource::Ordinary).map_err(|e| e.to_string())?;
        let direct = solve_direct(&sys.op).map_err(|e| e.to_string())?.x;
        let iter = solve_iterative(&sys.op, 1e-14, 10_000_000).map_err(|e| e.to_string())?.x;
        for (a, b) in iter.iter().zip(&direct) {
            let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
        ensure(worst <= SOLVER_TOL, || format!("seed {seed}: relative gap {worst:e}"))?;
        if seed < 5 {
            let exact = sys.h_values(&direct)[0].1;
            let est = estimate_moments(&m, &root(), 0, &[1], &[], SIM_SAMPLES, seed, &SimConfig::default())
                .map_err(|e| e.to_string())?;
            let p = &est.polynomial[0];
            let z = (p.mean - exact).abs() / p.se;
            worst_se = worst_se.max(z);
            ensure(z <= SIM_SE, || format!("seed {seed}: simulated {} vs {exact}, {z:.2} SE", p.mean))?;
        }
    }
    Ok(format!("max relative gap {worst:.1e}, max simulator deviation {worst_se:.2} SE"))
}

fn criterion_8a() -> Check {
    let m = BirthDeathGamma::new(2.0).map_err(|e| e.to_string())?;
    let w = gen_nonstrong_witness(&m, &root(), 14, None).map_err(|e| e.to_string())?;
    let r = verify_witness(&m, &root(), &w, WITNESS_TOL, None).map_err(|e| e.to_string())?;
    ensure(r.passes && r.verdict.state.is_diverging(), || format!("{:?}", r.reasons))?;
    Ok(format!("max violation {:.1e}, {}", r.max_violation, r.verdict.state))
}

fn criterion_8b() -> Check {
    let m = BirthDeathGamma::new(0.5).map_err(|e| e.to_string())?;
    let w = gen_nonergodic_witness(&m, &root(), 14, None).map_err(|e| e.to_string())?;
    let r = verify_witness(&m, &root(), &w, WITNESS_TOL, None).map_err(|e| e.to_string())?;
    ensure(r.passes && r.verdict.state.is_diverging(), || format!("{:?}", r.reasons))?;
    Ok(format!("max violation {:.1e}, {}", r.max_violation, r.verdict.state))
}

fn criterion_8c() -> Check {
    const COUNT: usize = 50;
    let c = catastrophe(AlphaFamily::LogPower { gamma: 1.0 })?;
    let out = gen_nonexp_witness(&c, &root(), COUNT, &NonExpOptions::default()).map_err(|e| e.to_string())?;
    let (sequence, info, skipped, stopped) = match out {
        NonExpOutcome::Witness { sequence, info, skipped, stopped } => (sequence, info, skipped, stopped),
        NonExpOutcome::NoWitness { n, .. } => return Err(format!("NoWitness at n={n}")),
    };
    let r = verify_witness(&c, &root(), &sequence, WITNESS_TOL, None).map_err(|e| e.to_string())?;
    ensure(r.max_violation <= WITNESS_TOL, || format!("max violation {:e}", r.max_violation))?;
    for i in &info {
        let n = i.n as f64;
        ensure(i.lambda <= 1.0 / n && (i.value - n).abs() <= 1e-6 * n, || {
            format!("n={}: lambda {} value {}", i.n, i.lambda, i.value)
        })?;
    }
    let found: Vec<usize> = info.iter().map(|i| i.n).collect();
    let want: Vec<usize> = (1..=COUNT).collect();
    ensure(found == want, || {
        let skip: Vec<usize> = skipped.iter().map(|s| s.n).collect();
        let stop = stopped.map(|s| format!("level budget exhausted at n={} (level {})", s.n, s.level)).unwrap_or_default();
        format!("terms for n={found:?}, skipped n={skip:?}; {stop}")
    })?;
    Ok(format!("{COUNT} terms"))
}

fn criterion_8d() -> Check {
    let c = catastrophe(AlphaFamily::Constant { c: 1.0 })?;
    match gen_nonexp_witness(&c, &root(), 50, &NonExpOptions::default()).map_err(|e| e.to_string())? {
        NonExpOutcome::NoWitness { n, cap, .. } => Ok(format!("NoWitness at n={n}, rate cap {cap:.3e}")),
        NonExpOutcome::Witness { info, .. } => Err(format!("witness with {} terms", info.len())),
    }
}

fn criterion_9() -> Check {
    const N_MAX: usize = 1000;
    const I_MAX: usize = 10_000;
    let mut notes = Vec::new();
    let mut record = |r: Result<ergoclass::zoo::level::LevelCheckReport, _>, t: Instant| -> Result<(), String> {
        let r = r.map_err(|e: ergoclass::zoo::level::LevelError| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        let direct = r.direct.as_ref().map_or(0, |d| d.violations);
        ensure(r.violations == 0 && direct == 0 && secs <= LEVEL_SECONDS, || {
            format!("{}: {} violations ({direct} direct), {secs:.1} s", r.family, r.violations)
        })?;
        notes.push(format!("{} {secs:.1}s", r.family));
        Ok(())
    };
    for fam in [BrusselFamily::LogLevel, BrusselFamily::Increment] {
        let t = Instant::now();
        record(brussel_level_inequality_check(BrusselRates { birth: 1.0, death: 1.0 }, fam, N_MAX, I_MAX), t)?;
    }
    for (g, fam) in [(2.0, MultiGammaFamily::PowerDecay), (2.0, MultiGammaFamily::LogShift), (1.0, MultiGammaFamily::Harmonic)] {
        let t = Instant::now();
        record(multi_gamma_level_check(g, fam, N_MAX, I_MAX, 2, 64), t)?;
    }
    Ok(notes.join(", "))
}

fn criterion_10() -> Check {
    let models: Vec<(&str, Box<dyn Generator>)> = vec![
        ("bd_gamma_2", Box::new(BirthDeathGamma::new(2.0).map_err(|e| e.to_string())?)),
        ("cat_constant", Box::new(catastrophe(AlphaFamily::Constant { c: 1.0 })?)),
        ("cat_log_0.5", Box::new(catastrophe(AlphaFamily::LogPower { gamma: 0.5 })?)),
    ];
    let mut worst = 0.0f64;
    for (id, m) in &models {
        for n in [8, 64, 512] {
            let cf = truncated_closed_form(m.as_ref(), n).map_err(|e| format!("{id} N={n}: {e}"))?;
            ensure(cf.max_rel_diff <= IDENTITY_TOL, || format!("{id} N={n}: {:e}", cf.max_rel_diff))?;
            worst = worst.max(cf.max_rel_diff);
        }
    }
    Ok(format!("max relative difference {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Check); 13] = [
        ("1", "birth-death gamma sweep", criterion_1),
        ("2", "single-birth explicit vs sweep agreement", criterion_2),
        ("3", "catastrophe family regression", criterion_3),
        ("4", "two-state closed forms", criterion_4),
        ("5", "catastrophe alpha = 1 closed forms", criterion_5),
        ("6", "monotone truncation sweeps on the zoo", criterion_6),
        ("7", "iterative vs direct, simulator agreement", criterion_7),
        ("8a", "non-strong witness, birth-death gamma 2", criterion_8a),
        ("8b", "non-ergodic witness, birth-death gamma 0.5", criterion_8b),
        ("8c", "non-exponential witness n = 1..50, alpha = 1/log i", criterion_8c),
        ("8d", "no non-exponential witness for alpha = 1", criterion_8d),
        ("9", "level-reduction inequality checks", criterion_9),
        ("10", "single-birth closed form vs direct solve", criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let t = Instant::now();
        let result = run();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id:>3} PASS  {title} ({detail}) [{secs:.1} s]"),
            Err(detail) => {
                let known = KNOWN_RED.contains(&id);
                let tag = if known { " (known red)" } else { "" };
                println!("criterion {id:>3} FAIL{tag}  {title}: {detail} [{secs:.1} s]");
                if !known {
                    unexpected.push(id);
                }
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
