//! Worked examples for each module, checked end to end.

use ergoclass::chain::{
    build_truncated_system, embedded_kernel, enumerate_states, ChainKind, ExplicitChain, SystemSource, TargetSet,
};
use ergoclass::classifier::{
    boundedness_verdict, classify, transience_certificate_check, ClassifyConfig, Growth, VerdictRule, VerdictState,
};
use ergoclass::moments::{exp_moment_scan, moment_ladder, pow2_schedule, truncation_sweep, MomentTable, SweepKind};
use ergoclass::single_birth::{
    build_tableau, build_tableau_with, catastrophe_recurrence, ergodicity_explicit, recurrence_explicit,
    strong_explicit, unbounded_solution_fixture, TableauMode,
};
use ergoclass::solver::{
    check_certificate, solve_direct, solve_iterative, NonnegAffineOperator, Sense, SolverError, SparseMatrix,
};
use ergoclass::witness::{gen_nonergodic_witness, gen_nonstrong_witness, verify_witness, DEFAULT_WITNESS_TOL};
use ergoclass::zoo::level::{brussel_level_inequality_check, BrusselFamily, BrusselRates};
use ergoclass::zoo::{
    birth_death_class, catalog, catastrophe_transience_certificate, AlphaFamily, AssertedClass, BirthDeathGamma,
    Brussel, BrusselParams, Catastrophe, MultiGamma, MultiGammaParams,
};

fn root() -> TargetSet {
    TargetSet::root()
}

fn cat(fam: AlphaFamily) -> Catastrophe {
    Catastrophe::new(fam).unwrap()
}

fn bd(gamma: f64) -> BirthDeathGamma {
    BirthDeathGamma::new(gamma).unwrap()
}

fn two_state() -> ExplicitChain {
    ExplicitChain::two_state(1.0, 1.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn state_enumeration_orders() {
    let c = cat(AlphaFamily::Constant { c: 1.0 });
    let one_d: Vec<Vec<u64>> = (0..5).map(|i| vec![i]).collect();
    assert_eq!(enumerate_states(&c, 5).unwrap(), one_d);

    let mg = MultiGamma::new(MultiGammaParams { sites: 2, gamma: 1.0, p: None }).unwrap();
    let want: Vec<Vec<u64>> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
    assert_eq!(enumerate_states(&mg, 6).unwrap(), want);

    let br = Brussel::new(BrusselParams::default()).unwrap();
    assert_eq!(enumerate_states(&br, 3).unwrap(), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
}

#[test]
fn embedded_rows() {
    let m = ExplicitChain::new(3, &[(0, 1, 2.0), (0, 2, 3.0), (1, 0, 1.0), (2, 0, 1.0)], ChainKind::Continuous).unwrap();
    assert_eq!(embedded_kernel(&m).row(0).unwrap(), vec![(1, 0.4), (2, 0.6)]);
    let t = two_state();
    assert_eq!(embedded_kernel(&t).row(0).unwrap(), vec![(1, 1.0)]);
    assert_eq!(embedded_kernel(&t).row(1).unwrap(), vec![(0, 1.0)]);
}

#[test]
fn catastrophe_truncated_system_and_solution() {
    let c = cat(AlphaFamily::Constant { c: 1.0 });
    let sys = build_truncated_system(&c, &root(), 2, SystemSource::Ordinary).unwrap();
    let a = sys.op.a.to_dense();
    assert!(close(a[0][1], 2.0 / 3.0, 1e-15) && a[0][0] == 0.0 && a[1] == vec![0.0, 0.0]);
    assert!(close(sys.op.g[0], 1.0 / 3.0, 1e-15) && close(sys.op.g[1], 0.25, 1e-15));
    let it = solve_iterative(&sys.op, 1e-14, 1000).unwrap().x;
    let d = solve_direct(&sys.op).unwrap().x;
    for x in [it, d] {
        assert!(close(x[0], 0.5, 1e-12) && close(x[1], 0.25, 1e-12), "{x:?}");
    }
    let empty = build_truncated_system(&c, &root(), 0, SystemSource::Ordinary).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn small_operator_solutions() {
    let op = NonnegAffineOperator::new(SparseMatrix::from_dense(&[vec![0.0]]), vec![2.0]).unwrap();
    assert_eq!(solve_iterative(&op, 1e-12, 100).unwrap().x, vec![2.0]);
    let op = NonnegAffineOperator::new(SparseMatrix::from_dense(&[vec![1.0]]), vec![1.0]).unwrap();
    assert!(matches!(solve_iterative(&op, 1e-12, 100_000), Err(SolverError::Infinite { .. })));

    let t = two_state();
    let sys = build_truncated_system(&t, &root(), 1, SystemSource::Exponential { lambda: 0.5 }).unwrap();
    assert!(close(solve_direct(&sys.op).unwrap().x[0], 2.0, 1e-12));

    let m = bd(2.0);
    let sys = build_truncated_system(&m, &root(), 3, SystemSource::Ordinary).unwrap();
    let d = solve_direct(&sys.op).unwrap().x;
    let i = solve_iterative(&sys.op, 1e-14, 1_000_000).unwrap().x;
    for (a, b) in d.iter().zip(&i) {
        assert!(close(*a, *b, 1e-10));
    }
}

#[test]
fn certificates_on_catastrophe() {
    let c = cat(AlphaFamily::Constant { c: 1.0 });
    let sys = build_truncated_system(&c, &root(), 64, SystemSource::Ordinary).unwrap();
    let ones = vec![1.0; sys.len()];
    assert!(check_certificate(&sys.op, &ones, Sense::Super).holds);
    let x = solve_direct(&sys.op).unwrap().x;
    let r = check_certificate(&sys.op, &x, Sense::Super);
    assert!(r.is_super && r.is_sub);
    let zero = vec![0.0; sys.len()];
    let r = check_certificate(&sys.op, &zero, Sense::Sub);
    assert!(r.holds);
    for (res, g) in r.residuals.iter().zip(&sys.op.g) {
        assert_eq!(*res, -g);
    }
}

#[test]
fn two_state_moments() {
    let t = two_state();
    let tables = moment_ladder(&t, &root(), 2, 1).unwrap();
    assert!(close(tables[0].value(1).unwrap(), 1.0, 1e-12) && close(tables[0].value(0).unwrap(), 2.0, 1e-12));
    assert!(close(tables[1].value(1).unwrap(), 2.0, 1e-12) && close(tables[1].value(0).unwrap(), 6.0, 1e-12));
    let zeroth = MomentTable::zeroth(&t, &root(), 1);
    assert!(zeroth.dense().iter().all(|v| *v == 1.0));

    let sweep = truncation_sweep(&t, &root(), SweepKind::Ordinary, &[1, 2, 4]);
    assert!(sweep.h_sequence().iter().all(|v| close(*v, 2.0, 1e-12)));

    let rule = VerdictRule::default();
    let grid = [0.5, 1e-4, 5e-5];
    let curve = exp_moment_scan(&t, &root(), Some(&grid), &[1, 1, 1, 1], &rule).unwrap();
    assert!(close(curve.points[0].sweep.levels[0].x_h, 6.0, 1e-12));
    assert!(curve.zero_limit.iter().all(|z| z.consistent && close(z.extrapolated, 2.0, 1e-6)));
}

#[test]
fn sweep_growth_examples() {
    let rule = VerdictRule::default();
    let s = truncation_sweep(&bd(0.5), &root(), SweepKind::Ordinary, &pow2_schedule(4, 15));
    assert!(s.h_verdict(&rule).state.is_diverging());

    let c = cat(AlphaFamily::LogPower { gamma: 1.0 });
    let curve = exp_moment_scan(&c, &root(), None, &pow2_schedule(4, 15), &rule).unwrap();
    assert!(curve.points.iter().all(|p| p.verdict.state.is_diverging()), "a lambda converged");
}

#[test]
fn verdict_examples() {
    let rule = VerdictRule::default();
    assert!(matches!(
        boundedness_verdict(&[2.0; 5], &rule).unwrap().state,
        VerdictState::Converged { limit } if limit == 2.0
    ));
    assert!(matches!(
        boundedness_verdict(&[2.0, 4.0, 8.0, 16.0, 32.0], &rule).unwrap().state,
        VerdictState::Diverging { growth: Growth::Geometric { .. } }
    ));
}

#[test]
fn classify_birth_death() {
    let cfg = ClassifyConfig::default().with_schedule(pow2_schedule(4, 15));
    let r = classify(&bd(2.0), &root(), 2, &cfg).unwrap();
    assert!(r.ergodic.verdict.state.is_converged() && r.strongly_ergodic.verdict.state.is_diverging());
    assert!(r.consistent);
}

#[test]
fn transience_certificates() {
    let c = cat(AlphaFamily::Power { gamma: 2.0 });
    let z = catastrophe_transience_certificate(&c, 4096);
    assert!(transience_certificate_check(&c, &root(), &z).passes);
    assert!(!transience_certificate_check(&c, &root(), &[1.0; 64]).passes);
    let t = two_state();
    for z in [[0.0, -1.0], [0.0, 1.0], [1.0, 1.0]] {
        assert!(!transience_certificate_check(&t, &root(), &z).passes);
    }
}

#[test]
fn polynomial_witness_examples() {
    let h = root();
    let w = gen_nonergodic_witness(&bd(0.5), &h, 12, None).unwrap();
    let r = verify_witness(&bd(0.5), &h, &w, DEFAULT_WITNESS_TOL, None).unwrap();
    assert!(r.passes, "{:?}", r.reasons);

    // Single-birth chain with d = ∞.
    let m = bd(1.0);
    let w = gen_nonergodic_witness(&m, &h, 14, None).unwrap();
    let r = verify_witness(&m, &h, &w, DEFAULT_WITNESS_TOL, None).unwrap();
    assert!(r.passes && r.verdict.state.is_diverging(), "{:?}", r.reasons);

    let m = bd(2.5);
    let w = gen_nonstrong_witness(&m, &h, 14, None).unwrap();
    let r = verify_witness(&m, &h, &w, DEFAULT_WITNESS_TOL, None).unwrap();
    assert!(!r.passes && r.verdict.state.is_converged());

    let t = two_state();
    let w = gen_nonstrong_witness(&t, &h, 4, None).unwrap();
    let r = verify_witness(&t, &h, &w, DEFAULT_WITNESS_TOL, None).unwrap();
    assert!(r.statistic.iter().all(|v| close(*v, 1.0, 1e-12)));
}

#[test]
fn brussel_log_level_family_passes() {
    let r = brussel_level_inequality_check(BrusselRates { birth: 1.0, death: 1.0 }, BrusselFamily::LogLevel, 256, 2000)
        .unwrap();
    assert!(r.passes && r.violations == 0);
}

#[test]
fn tableau_examples() {
    // a_n = b_n = n² for n ≥ 1, b_0 = 1.
    let m = bd(2.0);
    let t = build_tableau_with(&m, 16, TableauMode::Full).unwrap();
    for n in 0..=16 {
        assert!(close(t.f0(n), 1.0, 1e-14));
        assert_eq!(t.full_entry(n, n), Some(1.0));
    }
    assert!(close(t.d(3), 49.0 / 36.0, 1e-14));
}

#[test]
fn explicit_verdicts() {
    let rule = VerdictRule::default();
    let k = 1 << 16;
    let t_const = build_tableau(&cat(AlphaFamily::Constant { c: 1.0 }), k).unwrap();
    let d = ergodicity_explicit(&t_const, &rule).unwrap();
    assert!(close(d.estimate.unwrap(), 1.0, 1e-3));
    assert!(recurrence_explicit(&t_const, &rule).unwrap().verdict.state.is_diverging());

    let t_log = build_tableau(&cat(AlphaFamily::LogPower { gamma: 1.0 }), k).unwrap();
    assert!(ergodicity_explicit(&t_log, &rule).unwrap().verdict.state.is_diverging());

    let t2 = build_tableau(&bd(2.0), k).unwrap();
    let d2 = ergodicity_explicit(&t2, &rule).unwrap();
    assert!(d2.verdict.state.is_converged());
    assert!(strong_explicit(&t2, &d2, &rule).unwrap().verdict.state.is_diverging());
    assert!(recurrence_explicit(&t2, &rule).unwrap().verdict.state.is_diverging());

    let t3 = build_tableau(&bd(3.0), k).unwrap();
    let d3 = ergodicity_explicit(&t3, &rule).unwrap();
    assert!(strong_explicit(&t3, &d3, &rule).unwrap().verdict.state.is_converged());

    let t_sq = build_tableau(&cat(AlphaFamily::Power { gamma: 2.0 }), k).unwrap();
    assert!(recurrence_explicit(&t_sq, &rule).unwrap().verdict.state.is_converged());
}

#[test]
fn catastrophe_recurrence_sums() {
    let rule = VerdictRule::default();
    let k = 1 << 17;
    for (fam, recurrent) in [
        (AlphaFamily::LogPower { gamma: 1.0 }, true),
        (AlphaFamily::Power { gamma: 1.0 }, false),
        (AlphaFamily::Constant { c: 1.0 }, true),
    ] {
        let c = cat(fam);
        let v = catastrophe_recurrence(&|i| c.alpha(i), k, &rule).unwrap();
        assert_eq!(v.verdict.state.is_diverging(), recurrent, "{v:?}");
        assert_eq!(v.verdict.state.is_converged(), !recurrent);
    }
}

#[test]
fn unbounded_solutions() {
    let rule = VerdictRule::default();
    let c = cat(AlphaFamily::Constant { c: 1.0 });
    let exact = unbounded_solution_fixture(&c, 0.0, 64, 1.0, &rule).unwrap();
    assert!(exact.iter().all(|v| close(*v, 1.0, 1e-12)));
    let grown = unbounded_solution_fixture(&c, 1.0, 64, 1.0, &rule).unwrap();
    for (i, (a, b)) in grown.iter().zip(&exact).enumerate() {
        // Σ_{k<i} F_k^(0) = 1 + (i−1)/2 for state i = index + 1.
        assert!(close(a - b, 1.0 + i as f64 / 2.0, 1e-12));
    }

    let m = bd(2.0);
    let base = unbounded_solution_fixture(&m, 0.0, 64, 1.5, &rule).unwrap();
    let bumped = unbounded_solution_fixture(&m, 0.1, 64, 1.5, &rule).unwrap();
    for (i, (a, b)) in bumped.iter().zip(&base).enumerate() {
        assert!(close(a - b, 0.1 * (i + 1) as f64, 1e-12));
    }
}

#[test]
fn asserted_classes() {
    let c = catalog();
    let find = |id: &str| c.iter().find(|e| e.id == id).unwrap().asserted;
    assert_eq!(find("bd_gamma_2.5"), birth_death_class(2.5));
    assert_eq!(birth_death_class(2.5).strong, Some(true));
    assert_eq!(find("cat_log_1"), AssertedClass::NULL_RECURRENT);
    assert_eq!(find("cat_alternating"), AssertedClass::STRONG);
}

#[test]
fn zoo_classification_matches_assertions() {
    for entry in catalog() {
        let gen = entry.build().unwrap();
        let schedule = if gen.lattice().dim > 1 { pow2_schedule(2, 7) } else { pow2_schedule(4, 15) };
        let cfg = ClassifyConfig::default().with_schedule(schedule);
        let r = classify(gen.as_ref(), &root(), 2, &cfg).unwrap();
        let bad = entry.asserted.contradictions(&r);
        assert!(bad.is_empty(), "{}: {bad:?}", entry.id);
    }
}
