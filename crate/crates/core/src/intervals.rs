//! Confidence intervals for `π(h)` built from Chebyshev's and Markov's
//! inequalities, plus the CLT interval for width comparison.
//!
//! | kind            | half-width                          | needs                     |
//! |-----------------|-------------------------------------|---------------------------|
//! | `asymptotic-t1` | `(1+ε) B / √(nα)`                   | `lim sup n Var(e_n) ≤ B²` |
//! | `fixed-n-t2`    | `a_n = B / (√(nα)(1−δ))`            | `n Var(e_n) ≤ B²`, bias ≤ C |
//! | `stationary-c1` | `B / √(nα)`                         | stationary start          |
//! | `moment-t3`     | `γ_n / α`                           | `E|e_n − π(h)| ≤ γ_n`     |
//! | `enlarged-t5`   | base half-widths `+ c n^{−r}`       | stationary base interval  |
//! | `clt-reference` | `z_{1−α/2} B / √n`                  | a CLT (not checked here)  |
//!
//! In the fixed-n interval `δ = C / (B/√(nα) + C)`, which makes
//! `a_n = B/√(nα) + C` and `δ a_n = C`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_count, check_nonnegative, check_positive, Error, Result};
use crate::normal;

/// Default `ε` for the asymptotic interval.
pub const DEFAULT_EPSILON: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    AsymptoticT1,
    FixedNT2,
    StationaryC1,
    MomentT3,
    CltReference,
    EnlargedT5,
}

impl IntervalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalKind::AsymptoticT1 => "asymptotic-t1",
            IntervalKind::FixedNT2 => "fixed-n-t2",
            IntervalKind::StationaryC1 => "stationary-c1",
            IntervalKind::MomentT3 => "moment-t3",
            IntervalKind::CltReference => "clt-reference",
            IntervalKind::EnlargedT5 => "enlarged-t5",
        }
    }
}

impl fmt::Display for IntervalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width_lower: f64,
    pub half_width_upper: f64,
    pub alpha: f64,
    pub kind: IntervalKind,
    pub n: u64,
    /// `δ` of the fixed-n construction, when it applies.
    pub delta: Option<f64>,
}

impl ConfidenceInterval {
    fn symmetric(center: f64, half_width: f64, alpha: f64, kind: IntervalKind, n: u64) -> Self {
        Self {
            center,
            half_width_lower: half_width,
            half_width_upper: half_width,
            alpha,
            kind,
            n,
            delta: None,
        }
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width_lower
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width_upper
    }

    pub fn width(&self) -> f64 {
        self.half_width_lower + self.half_width_upper
    }

    /// Open-interval containment, `lower < x < upper`.
    pub fn contains(&self, x: f64) -> bool {
        self.lower() < x && x < self.upper()
    }
}

/// `B / √(nα)`, the Chebyshev radius shared by every variance-based interval.
#[inline]
fn chebyshev_radius(n: u64, alpha: f64, b: f64) -> f64 {
    b / (n as f64 * alpha).sqrt()
}

fn check_common(n: u64, alpha: f64, b: f64) -> Result<()> {
    check_count("n", n)?;
    check_alpha(alpha)?;
    check_positive("B", b)
}

/// Asymptotic conservative interval `e_n ± (1+ε) n^{−1/2} α^{−1/2} B`.
pub fn interval_t1(e_n: f64, n: u64, alpha: f64, b: f64, epsilon: f64) -> Result<ConfidenceInterval> {
    check_common(n, alpha, b)?;
    check_nonnegative("epsilon", epsilon)?;
    let half = (1.0 + epsilon) * chebyshev_radius(n, alpha, b);
    Ok(ConfidenceInterval::symmetric(e_n, half, alpha, IntervalKind::AsymptoticT1, n))
}

/// Fixed-n interval `e_n ± a_n` under a bias bound `C`. Records `δ`.
pub fn interval_t2(e_n: f64, n: u64, alpha: f64, b: f64, c: f64) -> Result<ConfidenceInterval> {
    check_common(n, alpha, b)?;
    check_nonnegative("C", c)?;
    let radius = chebyshev_radius(n, alpha, b);
    let denom = radius + c;
    let delta = c / denom;
    // 1 − δ, evaluated without cancellation when C dominates.
    let one_minus_delta = radius / denom;
    let a_n = radius / one_minus_delta;
    let mut ci = ConfidenceInterval::symmetric(e_n, a_n, alpha, IntervalKind::FixedNT2, n);
    ci.delta = Some(delta);
    Ok(ci)
}

/// Stationary interval `e_n ± n^{−1/2} α^{−1/2} B`, the `C = 0` case of
/// [`interval_t2`].
pub fn interval_c1(e_n: f64, n: u64, alpha: f64, b: f64) -> Result<ConfidenceInterval> {
    let mut ci = interval_t2(e_n, n, alpha, b, 0.0)?;
    ci.kind = IntervalKind::StationaryC1;
    Ok(ci)
}

/// First-moment interval `e_n ± γ_n / α`.
pub fn interval_t3(e_n: f64, n: u64, gamma_n: f64, alpha: f64) -> Result<ConfidenceInterval> {
    check_count("n", n)?;
    check_alpha(alpha)?;
    check_positive("gamma_n", gamma_n)?;
    Ok(ConfidenceInterval::symmetric(e_n, gamma_n / alpha, alpha, IntervalKind::MomentT3, n))
}

/// Widens both sides of `ci` by `c n^{−r}` for use from a non-stationary start.
pub fn enlarge_t5(ci: &ConfidenceInterval, c: f64, r: f64, n: u64) -> Result<ConfidenceInterval> {
    check_positive("c", c)?;
    check_count("n", n)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param("r", format!("must lie in (0, 1), got {r}")));
    }
    let extra = c * (n as f64).powf(-r);
    Ok(ConfidenceInterval {
        half_width_lower: ci.half_width_lower + extra,
        half_width_upper: ci.half_width_upper + extra,
        kind: IntervalKind::EnlargedT5,
        n,
        delta: None,
        ..*ci
    })
}

/// CLT interval `e_n ± z_{1−α/2} B / √n`. For comparison only.
pub fn clt_reference_interval(e_n: f64, n: u64, alpha: f64, b: f64) -> Result<ConfidenceInterval> {
    check_common(n, alpha, b)?;
    let z = normal::quantile(1.0 - alpha / 2.0);
    Ok(ConfidenceInterval::symmetric(
        e_n,
        z * b / (n as f64).sqrt(),
        alpha,
        IntervalKind::CltReference,
        n,
    ))
}

/// Total width of `a` over total width of `b`.
pub fn width_ratio(a: &ConfidenceInterval, b: &ConfidenceInterval) -> Result<f64> {
    let denom = b.width();
    if !(denom > 0.0) {
        return Err(Error::param("b", "denominator interval has zero width"));
    }
    let num = a.width();
    if !(num > 0.0) {
        return Err(Error::param("a", "numerator interval has zero width"));
    }
    Ok(num / denom)
}
