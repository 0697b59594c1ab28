//! Monte Carlo coverage laboratory.
//!
//! A plan fixes a chain, a functional, a start, a run length `n`, a number of
//! replications `R`, an interval method and a master seed. Replication `i`
//! runs on stream `(master_seed, i)`, so results do not depend on thread
//! scheduling and a plan always reproduces the same report.
//!
//! Variance and moment inputs estimated from data ("oracles") are computed
//! from their own runs under a separate seed, never from the traces whose
//! coverage is being measured.
//!
//! Which guarantee a plan exercises depends on its method:
//!
//! - `T1` from a fixed start: the asymptotic interval. At finite `n` the
//!   check is a surrogate for its lim-inf statement.
//! - `C1` from a stationary start: the fixed-n stationary interval.
//! - `T2` from a fixed start: the fixed-n interval, valid given a true bias
//!   bound `C` (exact for the square-root-bias chain).
//! - `T3`: the first-moment interval.
//! - `T5Enlarged` from a fixed start: the stationary interval widened by
//!   `c n^{−r}`. Its `B` oracle always runs from stationary starts because
//!   the interval being widened is the stationary one.
//! - `CltReference`: comparison only, no guarantee.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{bias_bound_t4, BetaPolicy, BiasBound, PolyErgodicityCert};
use crate::chains::{ChainSpec, FunctionalSpec, FunctionalTrace, StartMode};
use crate::error::{check_alpha, Error, Result};
use crate::estimators::{first_moment_bound, repeated_runs_variance, running_mean, VarianceBound};
use crate::intervals::{
    clt_reference_interval, enlarge_t5, interval_c1, interval_t1, interval_t2, interval_t3,
    ConfidenceInterval, IntervalKind,
};
use crate::rng::SeedRecord;
use crate::sum::CompensatedSum;

/// Where `B²` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum VarianceSpec {
    Assumed { b_squared: f64 },
    /// Repeated-runs estimate from `runs` independent traces on `seed`,
    /// multiplied by `inflation ≥ 1`.
    RepeatedRuns { runs: u64, seed: u64, inflation: f64 },
}

/// Where the bias bound `C` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum BiasSpec {
    Assumed { c: f64 },
    /// Exact bias of the square-root-bias chain from `X_0 = 1`.
    ExactSqrtBias,
    PolyErgodic { cert: PolyErgodicityCert, beta: BetaPolicy },
}

/// Where `γ_n` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum MomentSpec {
    Assumed { gamma_n: f64 },
    RepeatedRuns { runs: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum IntervalMethod {
    T1 { alpha: f64, epsilon: f64, variance: VarianceSpec },
    T2 { alpha: f64, variance: VarianceSpec, bias: BiasSpec },
    C1 { alpha: f64, variance: VarianceSpec },
    T3 { alpha: f64, moment: MomentSpec },
    CltReference { alpha: f64, variance: VarianceSpec },
    T5Enlarged { alpha: f64, variance: VarianceSpec, c: f64, r: f64 },
}

impl IntervalMethod {
    /// Short name, as accepted by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            IntervalMethod::T1 { .. } => "t1",
            IntervalMethod::T2 { .. } => "t2",
            IntervalMethod::C1 { .. } => "c1",
            IntervalMethod::T3 { .. } => "t3",
            IntervalMethod::CltReference { .. } => "clt-ref",
            IntervalMethod::T5Enlarged { .. } => "t5-enlarge",
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            IntervalMethod::T1 { alpha, .. }
            | IntervalMethod::T2 { alpha, .. }
            | IntervalMethod::C1 { alpha, .. }
            | IntervalMethod::T3 { alpha, .. }
            | IntervalMethod::CltReference { alpha, .. }
            | IntervalMethod::T5Enlarged { alpha, .. } => alpha,
        }
    }

    fn variance(&self) -> Option<VarianceSpec> {
        match *self {
            IntervalMethod::T1 { variance, .. }
            | IntervalMethod::T2 { variance, .. }
            | IntervalMethod::C1 { variance, .. }
            | IntervalMethod::CltReference { variance, .. }
            | IntervalMethod::T5Enlarged { variance, .. } => Some(variance),
            IntervalMethod::T3 { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub chain: ChainSpec,
    pub functional: FunctionalSpec,
    pub n: u64,
    pub replications: u64,
    pub start: StartMode,
    pub method: IntervalMethod,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        crate::error::check_count("n", self.n)?;
        if self.replications < 2 {
            return Err(Error::param("replications", format!("must be at least 2, got {}", self.replications)));
        }
        check_alpha(self.method.alpha())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub replications: u64,
    pub hits: u64,
    pub empirical_coverage: f64,
    pub mc_standard_error: f64,
    pub mean_width: f64,
    pub truth: f64,
    pub kind: IntervalKind,
    /// Resolved inputs, where the method uses them.
    pub b_squared: Option<f64>,
    pub c: Option<f64>,
    pub gamma_n: Option<f64>,
    pub plan: ExperimentPlan,
}

/// Interval parameters after oracles have been run.
#[derive(Debug, Clone, Copy)]
struct Resolved {
    method: IntervalMethod,
    n: u64,
    b_squared: Option<f64>,
    c: Option<f64>,
    gamma_n: Option<f64>,
}

impl Resolved {
    fn b(&self) -> f64 {
        self.b_squared.map_or(f64::NAN, f64::sqrt)
    }

    fn build(&self, e_n: f64) -> Result<ConfidenceInterval> {
        let n = self.n;
        match self.method {
            IntervalMethod::T1 { alpha, epsilon, .. } => interval_t1(e_n, n, alpha, self.b(), epsilon),
            IntervalMethod::T2 { alpha, .. } => {
                interval_t2(e_n, n, alpha, self.b(), self.c.unwrap_or(f64::NAN))
            }
            IntervalMethod::C1 { alpha, .. } => interval_c1(e_n, n, alpha, self.b()),
            IntervalMethod::T3 { alpha, .. } => {
                interval_t3(e_n, n, self.gamma_n.unwrap_or(f64::NAN), alpha)
            }
            IntervalMethod::CltReference { alpha, .. } => clt_reference_interval(e_n, n, alpha, self.b()),
            IntervalMethod::T5Enlarged { alpha, c, r, .. } => {
                enlarge_t5(&interval_c1(e_n, n, alpha, self.b())?, c, r, n)
            }
        }
    }
}

fn oracle_traces(
    plan: &ExperimentPlan,
    runs: u64,
    seed: u64,
    start: StartMode,
) -> Result<Vec<FunctionalTrace>> {
    if seed == plan.master_seed {
        return Err(Error::param(
            "oracle seed",
            "must differ from the master seed so oracle runs are independent of covered traces",
        ));
    }
    if runs < 2 {
        return Err(Error::param("oracle runs", format!("must be at least 2, got {runs}")));
    }
    let h = plan.functional.build();
    (0..runs)
        .into_par_iter()
        .map(|i| plan.chain.simulate_trace(&h, plan.n, start, SeedRecord::new(seed, i)))
        .collect()
}

fn resolve(plan: &ExperimentPlan, truth: f64) -> Result<Resolved> {
    let oracle_start = match plan.method {
        IntervalMethod::T5Enlarged { .. } => StartMode::Stationary,
        _ => plan.start,
    };
    let b_squared = match plan.method.variance() {
        None => None,
        Some(VarianceSpec::Assumed { b_squared }) => Some(VarianceBound::assumed(b_squared)?.b_squared),
        Some(VarianceSpec::RepeatedRuns { runs, seed, inflation }) => {
            let traces = oracle_traces(plan, runs, seed, oracle_start)?;
            Some(repeated_runs_variance(&traces)?.inflated(inflation)?.b_squared)
        }
    };
    let c = match plan.method {
        IntervalMethod::T2 { bias, .. } => Some(match bias {
            BiasSpec::Assumed { c } => BiasBound::assumed(c, plan.n)?.c,
            BiasSpec::ExactSqrtBias => {
                if plan.chain != ChainSpec::SqrtBias
                    || plan.functional != FunctionalSpec::AtLeastOne
                    || plan.start != StartMode::Fixed(1.0)
                {
                    return Err(Error::param(
                        "bias",
                        "exact bias is only known for the sqrt-bias chain with f = 1{x >= 1} from X_0 = 1",
                    ));
                }
                BiasBound::exact_sqrt_bias(plan.n)?.c
            }
            BiasSpec::PolyErgodic { cert, beta } => bias_bound_t4(&cert, plan.n, beta)?.c,
        }),
        _ => None,
    };
    let gamma_n = match plan.method {
        IntervalMethod::T3 { moment, .. } => Some(match moment {
            MomentSpec::Assumed { gamma_n } => gamma_n,
            MomentSpec::RepeatedRuns { runs, seed } => {
                let traces = oracle_traces(plan, runs, seed, plan.start)?;
                first_moment_bound(&traces, truth)?.gamma_n
            }
        }),
        _ => None,
    };
    Ok(Resolved {
        method: plan.method,
        n: plan.n,
        b_squared,
        c,
        gamma_n,
    })
}

/// Running means `e_n` for every replication of `plan`, in index order.
fn replication_means(plan: &ExperimentPlan) -> Result<Vec<f64>> {
    let h = plan.functional.build();
    (0..plan.replications)
        .into_par_iter()
        .map(|i| {
            plan.chain
                .simulate_trace(&h, plan.n, plan.start, SeedRecord::new(plan.master_seed, i))
                .map(|t| running_mean(&t))
        })
        .collect()
}

fn evaluate(plan: &ExperimentPlan, truth: f64, means: &[f64]) -> Result<CoverageReport> {
    let resolved = resolve(plan, truth)?;
    // Probe once so invalid parameters surface as errors before the loop.
    let kind = resolved.build(truth)?.kind;
    let intervals: Vec<ConfidenceInterval> = means
        .par_iter()
        .map(|&e_n| resolved.build(e_n))
        .collect::<Result<_>>()?;
    let hits = intervals.iter().filter(|ci| ci.contains(truth)).count() as u64;
    let widths: CompensatedSum = intervals.iter().map(ConfidenceInterval::width).collect();
    let r = plan.replications as f64;
    let p = hits as f64 / r;
    Ok(CoverageReport {
        replications: plan.replications,
        hits,
        empirical_coverage: p,
        mc_standard_error: (p * (1.0 - p) / r).sqrt(),
        mean_width: widths.value() / r,
        truth,
        kind,
        b_squared: resolved.b_squared,
        c: resolved.c,
        gamma_n: resolved.gamma_n,
        plan: *plan,
    })
}

/// Runs `plan.replications` independent traces and reports how often the
/// interval contains the true `π(h)`.
pub fn run_coverage(plan: &ExperimentPlan) -> Result<CoverageReport> {
    let mut reports = compare_methods(std::slice::from_ref(plan))?;
    Ok(reports.remove(0))
}

/// Evaluates several interval methods on one shared set of traces.
///
/// All plans must agree on chain, functional, `n`, `R`, start and master
/// seed.
pub fn compare_methods(plans: &[ExperimentPlan]) -> Result<Vec<CoverageReport>> {
    let Some(first) = plans.first() else {
        return Ok(Vec::new());
    };
    for p in plans {
        p.validate()?;
        if p.chain != first.chain {
            return Err(Error::PlanMismatch("chain"));
        }
        if p.functional != first.functional {
            return Err(Error::PlanMismatch("functional"));
        }
        if p.n != first.n {
            return Err(Error::PlanMismatch("n"));
        }
        if p.replications != first.replications {
            return Err(Error::PlanMismatch("replications"));
        }
        if p.start != first.start {
            return Err(Error::PlanMismatch("start"));
        }
        if p.master_seed != first.master_seed {
            return Err(Error::PlanMismatch("master seed"));
        }
    }
    let truth = first.chain.stationary_expectation(&first.functional)?;
    let means = replication_means(first)?;
    plans.iter().map(|p| evaluate(p, truth, &means)).collect()
}
