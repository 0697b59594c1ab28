//! Bias bounds from polynomial ergodicity, and empirical bias-rate fitting.
//!
//! A chain is polynomially ergodic of order `m` from `x` when
//! `‖Pⁿ(x,·) − π‖ ≤ M(x) n^{−m}` for every `n ≥ 1`. For `|f| ≤ D` the running
//! mean then satisfies `|Bias(e_n)| ≤ (2 D M(x) / n) Σ_{i≤n} i^{−m}`, and the
//! sum is bounded by `∫₀ⁿ x^{−m} dx` (or by the same integral with exponent
//! `β < 1` when `m ≥ 1`).

use serde::{Deserialize, Serialize};

use crate::error::{check_count, check_nonnegative, Error, Result};

/// Clamp margin keeping `β` strictly inside `(1/2, 1)`.
pub const BETA_MARGIN: f64 = 1e-6;

/// `(m, M(x), D)`: ergodicity order, its constant at the start state, and a
/// uniform bound on the functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyErgodicityCert {
    pub m: f64,
    pub m_x: f64,
    pub d: f64,
}

impl PolyErgodicityCert {
    pub fn new(m: f64, m_x: f64, d: f64) -> Result<Self> {
        crate::error::check_positive("m", m)?;
        check_nonnegative("M_x", m_x)?;
        check_nonnegative("D", d)?;
        Ok(Self { m, m_x, d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasProvenance {
    Assumed,
    PolyErgodicT4,
    ExactExample1,
}

impl BiasProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            BiasProvenance::Assumed => "assumed",
            BiasProvenance::PolyErgodicT4 => "poly-ergodic-t4",
            BiasProvenance::ExactExample1 => "exact-example1",
        }
    }
}

/// An upper bound `C ≥ |E(e_n) − π(h)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasBound {
    pub c: f64,
    pub n: u64,
    pub provenance: BiasProvenance,
    pub beta_used: Option<f64>,
}

impl BiasBound {
    pub fn assumed(c: f64, n: u64) -> Result<Self> {
        check_nonnegative("C", c)?;
        check_count("n", n)?;
        Ok(Self {
            c,
            n,
            provenance: BiasProvenance::Assumed,
            beta_used: None,
        })
    }

    /// Exact bias of the square-root-bias chain from `X_0 = 1`.
    pub fn exact_sqrt_bias(n: u64) -> Result<Self> {
        Ok(Self {
            c: crate::chains::exact_bias_sqrt_bias(n)?,
            n,
            provenance: BiasProvenance::ExactExample1,
            beta_used: None,
        })
    }
}

/// How `β` is chosen when `m ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaPolicy {
    /// Minimize the bound over `β` for the given `n`.
    Optimal,
    Fixed(f64),
}

/// `β* = 1 − 1/ln n`, the minimizer of `n^{−β}/(1−β)`, clamped to
/// `[1/2 + 10⁻⁶, 1 − 10⁻⁶]`.
pub fn optimal_beta(n: u64, m: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", format!("optimal beta needs n >= 2, got {n}")));
    }
    if !(m >= 1.0) {
        return Err(Error::param("m", format!("beta selection applies only for m >= 1, got {m}")));
    }
    let beta = 1.0 - 1.0 / (n as f64).ln();
    Ok(beta.clamp(0.5 + BETA_MARGIN, 1.0 - BETA_MARGIN))
}

/// Integral-comparison bias bound for a polynomially ergodic chain.
///
/// For `1/2 < m < 1`: `C = 2 D M(x) n^{−m} / (1 − m)`. For `m ≥ 1` the same
/// formula is used with `β ∈ (1/2, 1)` in place of `m`. At `n = 1` the
/// optimal policy falls back to the lower clamp since `ln 1 = 0`.
pub fn bias_bound_t4(cert: &PolyErgodicityCert, n: u64, beta_policy: BetaPolicy) -> Result<BiasBound> {
    check_count("n", n)?;
    if !(cert.m > 0.5) {
        return Err(Error::OrderTooLow { m: cert.m });
    }
    let scale = 2.0 * cert.d * cert.m_x;
    let nf = n as f64;
    let (exponent, beta_used) = if cert.m < 1.0 {
        (cert.m, None)
    } else {
        let beta = match beta_policy {
            BetaPolicy::Optimal if n < 2 => 0.5 + BETA_MARGIN,
            BetaPolicy::Optimal => optimal_beta(n, cert.m)?,
            BetaPolicy::Fixed(b) => {
                if !(b > 0.5 && b < 1.0) {
                    return Err(Error::param("beta", format!("must lie in (0.5, 1), got {b}")));
                }
                b
            }
        };
        (beta, Some(beta))
    };
    Ok(BiasBound {
        c: scale / (1.0 - exponent) * nf.powf(-exponent),
        n,
        provenance: BiasProvenance::PolyErgodicT4,
        beta_used,
    })
}

/// OLS slope of `ln(bias)` against `ln(n)`.
pub fn fit_bias_rate(sample_sizes: &[u64], biases: &[f64]) -> Result<f64> {
    if sample_sizes.len() != biases.len() {
        return Err(Error::param(
            "biases",
            format!("{} sizes but {} biases", sample_sizes.len(), biases.len()),
        ));
    }
    if sample_sizes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs at least 3 points, got {}",
            sample_sizes.len()
        )));
    }
    if sample_sizes[0] == 0 || sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("sample_sizes", "must be positive and strictly increasing"));
    }
    if let Some(b) = biases.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::param("biases", format!("must be positive and finite, got {b}")));
    }

    let xs: Vec<f64> = sample_sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = biases.iter().map(|b| b.ln()).collect();
    let k = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / k;
    let y_bar = ys.iter().sum::<f64>() / k;
    let (sxy, sxx) = xs
        .iter()
        .zip(&ys)
        .fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
            (sxy + (x - x_bar) * (y - y_bar), sxx + (x - x_bar) * (x - x_bar))
        });
    Ok(sxy / sxx)
}
