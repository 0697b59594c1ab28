use mcci::chains::{ChainSpec, FunctionalSpec, StartMode};
use mcci::coverage::{
    compare_methods, run_coverage, BiasSpec, ExperimentPlan, IntervalMethod, MomentSpec, VarianceSpec,
};
use mcci::Error;

const SEED: u64 = 77_001;
const ORACLE: VarianceSpec = VarianceSpec::RepeatedRuns { runs: 200, seed: 77_002, inflation: 1.0 };

fn plan(chain: ChainSpec, functional: FunctionalSpec, n: u64, start: StartMode, method: IntervalMethod) -> ExperimentPlan {
    ExperimentPlan {
        chain,
        functional,
        n,
        replications: 300,
        start,
        method,
        master_seed: SEED,
    }
}

/// Three-standard-error slack below the nominal level for `R` replications.
fn floor(alpha: f64, r: u64) -> f64 {
    let p = 1.0 - alpha;
    p - 3.0 * (p * alpha / r as f64).sqrt()
}

#[test]
fn chebyshev_intervals_are_conservative_on_every_chain() {
    let cases = [
        (ChainSpec::TwoState { p01: 0.2, p10: 0.4 }, FunctionalSpec::Identity, StartMode::Stationary),
        (ChainSpec::Ar1 { rho: 0.5 }, FunctionalSpec::Identity, StartMode::Stationary),
        (ChainSpec::Ar1 { rho: -0.3 }, FunctionalSpec::Identity, StartMode::Stationary),
    ];
    for (chain, functional, start) in cases {
        let methods = [
            IntervalMethod::T1 { alpha: 0.1, epsilon: 0.001, variance: ORACLE },
            IntervalMethod::C1 { alpha: 0.1, variance: ORACLE },
            IntervalMethod::T3 { alpha: 0.1, moment: MomentSpec::RepeatedRuns { runs: 200, seed: 77_003 } },
        ];
        let plans: Vec<_> = methods.iter().map(|&m| plan(chain, functional, 2_000, start, m)).collect();
        for r in compare_methods(&plans).unwrap() {
            assert!(
                r.empirical_coverage >= floor(0.1, r.replications),
                "{} on {}: {}",
                r.plan.method.name(),
                chain.chain_id(),
                r.empirical_coverage
            );
        }
    }
}

#[test]
fn sqrt_bias_intervals_are_conservative() {
    let start = StartMode::Fixed(1.0);
    let plans = [
        plan(
            ChainSpec::SqrtBias,
            FunctionalSpec::AtLeastOne,
            200,
            start,
            IntervalMethod::T2 { alpha: 0.05, variance: ORACLE, bias: BiasSpec::ExactSqrtBias },
        ),
        plan(
            ChainSpec::SqrtBias,
            FunctionalSpec::AtLeastOne,
            200,
            start,
            IntervalMethod::T3 { alpha: 0.05, moment: MomentSpec::RepeatedRuns { runs: 500, seed: 77_004 } },
        ),
    ];
    for r in compare_methods(&plans).unwrap() {
        assert!(r.empirical_coverage >= floor(0.05, r.replications), "{}: {}", r.plan.method.name(), r.empirical_coverage);
    }
}

#[test]
fn larger_intervals_never_lose_hits() {
    let chain = ChainSpec::TwoState { p01: 0.1, p10: 0.3 };
    let start = StartMode::Fixed(1.0);
    let b2 = VarianceSpec::Assumed { b_squared: 0.3 };
    let mk = |m| plan(chain, FunctionalSpec::Identity, 500, start, m);
    let pairs = [
        (
            IntervalMethod::T2 { alpha: 0.5, variance: b2, bias: BiasSpec::Assumed { c: 0.0 } },
            IntervalMethod::T2 { alpha: 0.5, variance: b2, bias: BiasSpec::Assumed { c: 0.5 } },
        ),
        (
            IntervalMethod::T1 { alpha: 0.5, epsilon: 0.001, variance: b2 },
            IntervalMethod::T1 { alpha: 0.5, epsilon: 0.5, variance: b2 },
        ),
        (
            IntervalMethod::T5Enlarged { alpha: 0.5, variance: b2, c: 0.1, r: 0.5 },
            IntervalMethod::T5Enlarged { alpha: 0.5, variance: b2, c: 2.0, r: 0.5 },
        ),
        (
            IntervalMethod::C1 { alpha: 0.5, variance: b2 },
            IntervalMethod::C1 { alpha: 0.1, variance: b2 },
        ),
    ];
    for (narrow, wide) in pairs {
        let r = compare_methods(&[mk(narrow), mk(wide)]).unwrap();
        assert!(r[1].mean_width > r[0].mean_width, "{narrow:?}");
        assert!(r[1].hits >= r[0].hits, "{narrow:?}: {} < {}", r[1].hits, r[0].hits);
    }
}

#[test]
fn t1_over_clt_width_ratio_is_exact() {
    let chain = ChainSpec::Ar1 { rho: 0.2 };
    let b2 = VarianceSpec::Assumed { b_squared: 1.5 };
    let plans = [
        plan(chain, FunctionalSpec::Identity, 100, StartMode::Stationary, IntervalMethod::T1 { alpha: 0.05, epsilon: 0.001, variance: b2 }),
        plan(chain, FunctionalSpec::Identity, 100, StartMode::Stationary, IntervalMethod::CltReference { alpha: 0.05, variance: b2 }),
    ];
    let r = compare_methods(&plans).unwrap();
    let ratio = r[0].mean_width / r[1].mean_width;
    assert!((ratio - 2.284_025_689_382_811).abs() < 1e-12, "{ratio}");
}

#[test]
fn identical_plans_give_identical_reports() {
    let p = plan(
        ChainSpec::TwoState { p01: 0.3, p10: 0.3 },
        FunctionalSpec::Identity,
        300,
        StartMode::Stationary,
        IntervalMethod::C1 { alpha: 0.05, variance: ORACLE },
    );
    let r = compare_methods(&[p, p]).unwrap();
    assert_eq!(r[0], r[1]);
    assert_eq!(run_coverage(&p).unwrap(), r[0]);
}

#[test]
fn mismatched_plans_are_rejected() {
    let method = IntervalMethod::C1 { alpha: 0.05, variance: VarianceSpec::Assumed { b_squared: 1.0 } };
    let a = plan(ChainSpec::Ar1 { rho: 0.1 }, FunctionalSpec::Identity, 100, StartMode::Stationary, method);
    let b = ExperimentPlan { n: 101, ..a };
    assert!(matches!(compare_methods(&[a, b]), Err(Error::PlanMismatch(_))));
}

#[test]
fn enlarged_interval_covers_from_a_bad_start() {
    // Started from the rare state; the enlargement absorbs the burn-in bias.
    let p = plan(
        ChainSpec::TwoState { p01: 0.05, p10: 0.45 },
        FunctionalSpec::Identity,
        2_000,
        StartMode::Fixed(1.0),
        IntervalMethod::T5Enlarged { alpha: 0.05, variance: ORACLE, c: 1.0, r: 0.5 },
    );
    let r = run_coverage(&p).unwrap();
    assert!(r.empirical_coverage >= floor(0.05, r.replications), "{}", r.empirical_coverage);
}

#[test]
fn degenerate_functional_is_always_covered() {
    let p = plan(
        ChainSpec::Ar1 { rho: 0.9 },
        FunctionalSpec::Constant(3.5),
        50,
        StartMode::Fixed(10.0),
        IntervalMethod::C1 { alpha: 0.05, variance: VarianceSpec::Assumed { b_squared: 1e-6 } },
    );
    let r = run_coverage(&p).unwrap();
    assert_eq!(r.hits, r.replications);
    assert_eq!(r.truth, 3.5);
}
