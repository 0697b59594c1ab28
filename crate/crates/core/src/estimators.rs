//! Point estimate `e_n` and the variance / first-moment bounds that feed the
//! interval constructions.
//!
//! Two routes to `B² ≈ lim n·Var(e_n)` are provided: batch means over one
//! long trace, and the spread of independent replications. Both are
//! estimates; callers who want a safety margin can apply
//! [`VarianceBound::inflated`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::FunctionalTrace;
use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::sum::{self, CompensatedSum};

/// Floor keeping `γ_n` strictly positive for degenerate (constant) chains.
pub const GAMMA_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceSource {
    Assumed,
    BatchMeans,
    RepeatedRuns,
}

/// Bound (or estimate) of `lim sup n·Var(e_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceBound {
    pub b_squared: f64,
    pub source: VarianceSource,
    pub n_used: u64,
    /// Multiplicative inflation applied on top of the raw value (1 if none).
    pub inflation: f64,
}

impl VarianceBound {
    pub fn assumed(b_squared: f64) -> Result<Self> {
        check_nonnegative("B_squared", b_squared)?;
        Ok(Self {
            b_squared,
            source: VarianceSource::Assumed,
            n_used: 1,
            inflation: 1.0,
        })
    }

    /// `B = √(B²)`.
    pub fn b(&self) -> f64 {
        self.b_squared.sqrt()
    }

    /// Copy with `B²` multiplied by `factor ≥ 1`.
    pub fn inflated(&self, factor: f64) -> Result<Self> {
        if !(factor >= 1.0 && factor.is_finite()) {
            return Err(Error::param("inflation", format!("must be finite and >= 1, got {factor}")));
        }
        Ok(Self {
            b_squared: self.b_squared * factor,
            inflation: self.inflation * factor,
            ..*self
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentSource {
    Assumed,
    RepeatedRuns,
}

/// Bound `γ_n ≥ E|e_n − π(h)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBound {
    pub gamma_n: f64,
    pub n: u64,
    pub source: MomentSource,
}

impl MomentBound {
    pub fn assumed(gamma_n: f64, n: u64) -> Result<Self> {
        check_positive("gamma_n", gamma_n)?;
        crate::error::check_count("n", n)?;
        Ok(Self {
            gamma_n,
            n,
            source: MomentSource::Assumed,
        })
    }
}

/// Compensated arithmetic mean.
pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("mean of an empty sequence".into()));
    }
    Ok(sum::sum(values) / values.len() as f64)
}

/// Unbiased sample variance (divisor `len − 1`), two-pass.
fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData("sample variance needs two values".into()));
    }
    let m = mean(values)?;
    let ss: CompensatedSum = values.iter().map(|&x| (x - m) * (x - m)).collect();
    Ok(ss.value() / (values.len() - 1) as f64)
}

/// `e_n = (1/n) Σ h(X_i)`.
pub fn running_mean(trace: &FunctionalTrace) -> f64 {
    // Traces are nonempty by construction.
    sum::sum(trace.values()) / trace.n() as f64
}

/// Batch-means estimate of the asymptotic variance.
///
/// The first `n mod batch_count` values are dropped so the remaining batches
/// have equal length `L`; the estimate is `L × s²` where `s²` is the sample
/// variance of the batch averages.
pub fn batch_means_variance(trace: &FunctionalTrace, batch_count: usize) -> Result<VarianceBound> {
    if batch_count < 2 {
        return Err(Error::param("batch_count", format!("must be at least 2, got {batch_count}")));
    }
    let n = trace.n();
    if n < 2 * batch_count {
        return Err(Error::InsufficientData(format!(
            "{n} samples cannot fill {batch_count} batches of length >= 2"
        )));
    }
    let len = n / batch_count;
    let used = &trace.values()[n % batch_count..];
    let batch_means: Vec<f64> = used
        .chunks_exact(len)
        .map(|b| sum::sum(b) / len as f64)
        .collect();
    let b_squared = len as f64 * sample_variance(&batch_means)?;
    Ok(VarianceBound {
        b_squared,
        source: VarianceSource::BatchMeans,
        n_used: (batch_count * len) as u64,
        inflation: 1.0,
    })
}

fn check_comparable(traces: &[FunctionalTrace]) -> Result<usize> {
    if traces.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 traces, got {}",
            traces.len()
        )));
    }
    let n = traces[0].n();
    let chain = traces[0].chain_id();
    for t in &traces[1..] {
        if t.n() != n {
            return Err(Error::MismatchedTraces(format!("lengths {} and {}", n, t.n())));
        }
        if t.chain_id() != chain {
            return Err(Error::MismatchedTraces(format!(
                "chains `{chain}` and `{}`",
                t.chain_id()
            )));
        }
    }
    Ok(n)
}

/// Repeated-runs estimate: `B² = n × s²` over the per-trace means.
pub fn repeated_runs_variance(traces: &[FunctionalTrace]) -> Result<VarianceBound> {
    let n = check_comparable(traces)?;
    let means: Vec<f64> = traces.par_iter().map(running_mean).collect();
    Ok(VarianceBound {
        b_squared: n as f64 * sample_variance(&means)?,
        source: VarianceSource::RepeatedRuns,
        n_used: (n * traces.len()) as u64,
        inflation: 1.0,
    })
}

/// First absolute moment bound from replications with known truth.
///
/// The sample mean of `|e_n − π(h)|` is inflated by `1 + 2/√R` and floored at
/// [`GAMMA_FLOOR`].
pub fn first_moment_bound(traces: &[FunctionalTrace], true_value: f64) -> Result<MomentBound> {
    let n = check_comparable(traces)?;
    let deviations: Vec<f64> = traces
        .par_iter()
        .map(|t| (running_mean(t) - true_value).abs())
        .collect();
    let r = traces.len() as f64;
    let gamma = mean(&deviations)? * (1.0 + 2.0 / r.sqrt());
    Ok(MomentBound {
        gamma_n: gamma.max(GAMMA_FLOOR),
        n: n as u64,
        source: MomentSource::RepeatedRuns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::StartMode;
    use crate::rng::SeedRecord;
    use proptest::prelude::*;

    fn trace(values: Vec<f64>) -> FunctionalTrace {
        FunctionalTrace::new(values, "test", StartMode::Fixed(0.0), SeedRecord::new(0, 0)).unwrap()
    }

    #[test]
    fn running_mean_examples() {
        assert_eq!(running_mean(&trace(vec![1.0, 1.0, 1.0])), 1.0);
        assert_eq!(running_mean(&trace(vec![0.0, 1.0, 0.0, 1.0])), 0.5);
        // surviving sqrt-bias path 2, 3, 4 under 1{x >= 1}
        let h = crate::chains::Functional::at_least_one();
        let values = [2.0, 3.0, 4.0].iter().map(|&x| h.eval(x)).collect();
        assert_eq!(running_mean(&trace(values)), 1.0);
        assert!(mean(&[]).is_err());
        assert!(FunctionalTrace::new(vec![], "x", StartMode::Stationary, SeedRecord::new(0, 0)).is_err());
    }

    #[test]
    fn batch_means_edge_cases() {
        let constant = trace(vec![3.5; 1000]);
        let v = batch_means_variance(&constant, 10).unwrap();
        assert_eq!(v.b_squared, 0.0);
        assert_eq!(v.n_used, 1000);
        assert_eq!(v.source, VarianceSource::BatchMeans);

        assert!(batch_means_variance(&constant, 1).is_err());
        assert!(matches!(
            batch_means_variance(&trace(vec![0.0; 19]), 10),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn batch_means_drops_leading_remainder() {
        // 7 values into 3 batches of 2: the first value is discarded.
        let t = trace(vec![100.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
        let v = batch_means_variance(&t, 3).unwrap();
        // batch means 0, 1, 2 -> s^2 = 1, times L = 2
        assert_eq!(v.b_squared, 2.0);
        assert_eq!(v.n_used, 6);
    }

    #[test]
    fn repeated_runs_edge_cases() {
        let a = trace(vec![0.0, 1.0, 2.0]);
        let v = repeated_runs_variance(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(v.b_squared, 0.0);
        assert!(repeated_runs_variance(&[a.clone()]).is_err());
        let short = trace(vec![0.0, 1.0]);
        assert!(matches!(
            repeated_runs_variance(&[a.clone(), short]),
            Err(Error::MismatchedTraces(_))
        ));
        let other = FunctionalTrace::new(vec![0.0; 3], "other", StartMode::Stationary, SeedRecord::new(0, 0)).unwrap();
        assert!(matches!(
            repeated_runs_variance(&[a, other]),
            Err(Error::MismatchedTraces(_))
        ));
    }

    #[test]
    fn repeated_runs_known_spread() {
        // means 0 and 2, n = 2 -> s^2 = 2, B^2 = 4
        let v = repeated_runs_variance(&[trace(vec![0.0, 0.0]), trace(vec![2.0, 2.0])]).unwrap();
        assert_eq!(v.b_squared, 4.0);
        assert_eq!(v.n_used, 4);
    }

    #[test]
    fn first_moment_floor_and_inflation() {
        let t = trace(vec![0.25; 10]);
        let m = first_moment_bound(&[t.clone(), t.clone(), t], 0.25).unwrap();
        assert_eq!(m.gamma_n, GAMMA_FLOOR);

        // |means - 0| = 1 and 3 -> mean 2, R = 4 -> inflation 1 + 2/2 = 2
        let ts = vec![
            trace(vec![1.0]),
            trace(vec![-1.0]),
            trace(vec![3.0]),
            trace(vec![-3.0]),
        ];
        let m = first_moment_bound(&ts, 0.0).unwrap();
        assert_eq!(m.gamma_n, 4.0);
        assert_eq!(m.n, 1);
        assert!(first_moment_bound(&ts[..1], 0.0).is_err());
    }

    #[test]
    fn inflation_and_assumed() {
        let v = VarianceBound::assumed(4.0).unwrap();
        assert_eq!(v.b(), 2.0);
        let w = v.inflated(1.5).unwrap();
        assert_eq!(w.b_squared, 6.0);
        assert_eq!(w.inflation, 1.5);
        assert_eq!(w.source, VarianceSource::Assumed);
        assert!(v.inflated(0.5).is_err());
        assert!(VarianceBound::assumed(-1.0).is_err());
        assert!(MomentBound::assumed(0.0, 10).is_err());
    }

    proptest! {
        #[test]
        fn mean_is_permutation_invariant_and_translation_equivariant(
            mut values in prop::collection::vec(-1e3f64..1e3, 1..200),
            shift in -1e3f64..1e3,
            seed in any::<u64>(),
        ) {
            let base = mean(&values).unwrap();
            let shifted: Vec<f64> = values.iter().map(|x| x + shift).collect();
            prop_assert!((mean(&shifted).unwrap() - (base + shift)).abs() <= 1e-12 * (1.0 + base.abs() + shift.abs()));

            // deterministic shuffle
            let mut s = seed | 1;
            for i in (1..values.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                values.swap(i, (s % (i as u64 + 1)) as usize);
            }
            prop_assert!((mean(&values).unwrap() - base).abs() <= 1e-12 * (1.0 + base.abs()));
        }

        #[test]
        fn repeated_runs_is_scale_equivariant(
            rows in prop::collection::vec(prop::collection::vec(-10f64..10.0, 5), 2..20),
            scale in prop_oneof![-100f64..-0.01, 0.01f64..100.0],
        ) {
            let traces: Vec<_> = rows.iter().cloned().map(trace).collect();
            let scaled: Vec<_> = rows
                .iter()
                .map(|r| trace(r.iter().map(|x| x * scale).collect()))
                .collect();
            let a = repeated_runs_variance(&traces).unwrap().b_squared;
            let b = repeated_runs_variance(&scaled).unwrap().b_squared;
            let expected = a * scale * scale;
            prop_assert!((b - expected).abs() <= 1e-12 * expected.abs().max(1e-300) || (a == 0.0 && b == 0.0),
                "a={a} b={b} expected={expected}");
        }
    }
}
