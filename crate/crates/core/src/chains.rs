//! Markov kernels, the built-in chain zoo, and exact oracles for the
//! square-root-bias chain.
//!
//! The zoo has three members:
//!
//! - [`TwoStateKernel`]: flips `0 → 1` with probability `p01` and `1 → 0`
//!   with probability `p10`. Finite state space, known stationary mean.
//! - [`Ar1Kernel`]: `X' = ρ X + Z` with standard normal `Z`. Real line,
//!   stationary mean 0.
//! - [`SqrtBiasKernel`]: from state `s ≥ 1` moves to `s + 1` with
//!   probability `√s / √(s+1)` and otherwise falls into the absorbing state 0.
//!   Stationary law is the point mass at 0, but from `X_0 = 1` the running
//!   mean of `1{X ≥ 1}` has bias of exact order `1/√n`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_count, Error, Result};
use crate::normal;
use crate::rng::{uniform, ChainRng, SeedRecord};
use crate::sum::CompensatedSum;

/// State types a kernel can run on.
pub trait ChainState: Copy + Send + Sync + fmt::Debug + 'static {
    fn to_f64(self) -> f64;
    fn from_f64(x: f64) -> Option<Self>;
}

impl ChainState for u64 {
    fn to_f64(self) -> f64 {
        self as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 {
            Some(x as u64)
        } else {
            None
        }
    }
}

impl ChainState for f64 {
    fn to_f64(self) -> f64 {
        self
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateSpace {
    CountableIntegers,
    RealLine,
}

/// A time-homogeneous transition law.
///
/// `step` must be a pure function of the current state and the generator
/// state, so that replaying a seed replays the path.
pub trait MarkovKernel: Send + Sync {
    type State: ChainState;

    fn chain_id(&self) -> &str;

    fn state_space(&self) -> StateSpace;

    fn contains(&self, _state: Self::State) -> bool {
        true
    }

    fn step(&self, state: Self::State, rng: &mut ChainRng) -> Self::State;

    /// Exact draw from the stationary law, if the kernel has one.
    fn sample_stationary(&self, _rng: &mut ChainRng) -> Option<Self::State> {
        None
    }

    /// π(identity), when known in closed form.
    fn exact_stationary_mean(&self) -> Option<f64> {
        None
    }
}

/// Transition of the square-root-bias chain given a uniform draw `u ∈ [0, 1)`.
#[inline]
pub fn sqrt_bias_transition(state: u64, u: f64) -> u64 {
    if state == 0 {
        return 0;
    }
    let s = state as f64;
    if u < s.sqrt() / (s + 1.0).sqrt() {
        state + 1
    } else {
        0
    }
}

/// One step of the square-root-bias chain.
#[inline]
pub fn step_sqrt_bias(state: u64, rng: &mut ChainRng) -> u64 {
    // Absorbed paths don't consume randomness.
    if state == 0 {
        return 0;
    }
    sqrt_bias_transition(state, uniform(rng))
}

/// `P[X_n ≠ 0]` for the square-root-bias chain started at `X_0 = 1`, which
/// telescopes to `1/√(n+1)`.
pub fn tail_probability_sqrt_bias(n: u64) -> Result<f64> {
    check_count("n", n)?;
    Ok(1.0 / ((n + 1) as f64).sqrt())
}

/// Exact bias `E(e_n) − π(f)` of the square-root-bias chain from `X_0 = 1`
/// with `f = 1{x ≥ 1}`: `(1/n) Σ_{j=1}^n 1/√(j+1)`.
pub fn exact_bias_sqrt_bias(n: u64) -> Result<f64> {
    check_count("n", n)?;
    let total: CompensatedSum = (1..=n).map(|j| 1.0 / ((j + 1) as f64).sqrt()).collect();
    Ok(total.value() / n as f64)
}

/// Exact biases for every `n` in `1..=n_max`; entry `k` holds the bias at
/// `n = k + 1`.
pub fn exact_bias_sqrt_bias_table(n_max: u64) -> Result<Vec<f64>> {
    check_count("n_max", n_max)?;
    let mut acc = CompensatedSum::new();
    Ok((1..=n_max)
        .map(|j| {
            acc.add(1.0 / ((j + 1) as f64).sqrt());
            acc.value() / j as f64
        })
        .collect())
}

#[derive(Debug, Clone, Default)]
pub struct SqrtBiasKernel;

impl MarkovKernel for SqrtBiasKernel {
    type State = u64;

    fn chain_id(&self) -> &str {
        "sqrt-bias"
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::CountableIntegers
    }

    fn step(&self, state: u64, rng: &mut ChainRng) -> u64 {
        step_sqrt_bias(state, rng)
    }

    fn sample_stationary(&self, _rng: &mut ChainRng) -> Option<u64> {
        Some(0)
    }

    fn exact_stationary_mean(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct TwoStateKernel {
    p01: f64,
    p10: f64,
    id: String,
}

/// Two-state flip chain on `{0, 1}`.
pub fn make_two_state_kernel(p01: f64, p10: f64) -> Result<TwoStateKernel> {
    for (name, p) in [("p01", p01), ("p10", p10)] {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param(
                name,
                format!("flip probability must lie in (0, 1], got {p}"),
            ));
        }
    }
    Ok(TwoStateKernel {
        p01,
        p10,
        id: format!("two-state(p01={p01},p10={p10})"),
    })
}

impl TwoStateKernel {
    pub fn p01(&self) -> f64 {
        self.p01
    }

    pub fn p10(&self) -> f64 {
        self.p10
    }

    /// Stationary probability of state 1.
    pub fn stationary_one(&self) -> f64 {
        self.p01 / (self.p01 + self.p10)
    }

    /// The state with smaller stationary mass (0 on ties).
    pub fn less_likely_state(&self) -> u64 {
        if self.p01 < self.p10 {
            1
        } else {
            0
        }
    }
}

impl MarkovKernel for TwoStateKernel {
    type State = u64;

    fn chain_id(&self) -> &str {
        &self.id
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::CountableIntegers
    }

    fn contains(&self, state: u64) -> bool {
        state <= 1
    }

    fn step(&self, state: u64, rng: &mut ChainRng) -> u64 {
        let u = uniform(rng);
        match state {
            0 if u < self.p01 => 1,
            0 => 0,
            _ if u < self.p10 => 0,
            _ => 1,
        }
    }

    fn sample_stationary(&self, rng: &mut ChainRng) -> Option<u64> {
        Some(u64::from(uniform(rng) < self.stationary_one()))
    }

    fn exact_stationary_mean(&self) -> Option<f64> {
        Some(self.stationary_one())
    }
}

#[derive(Debug, Clone)]
pub struct Ar1Kernel {
    rho: f64,
    id: String,
}

/// Gaussian AR(1) chain `X' = ρ X + Z`.
pub fn make_ar1_kernel(rho: f64) -> Result<Ar1Kernel> {
    if !(rho.abs() < 1.0) {
        return Err(Error::param(
            "rho",
            format!("|rho| must be below 1 for ergodicity, got {rho}"),
        ));
    }
    Ok(Ar1Kernel {
        rho,
        id: format!("ar1(rho={rho})"),
    })
}

impl Ar1Kernel {
    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl MarkovKernel for Ar1Kernel {
    type State = f64;

    fn chain_id(&self) -> &str {
        &self.id
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::RealLine
    }

    fn step(&self, state: f64, rng: &mut ChainRng) -> f64 {
        self.rho * state + normal::draw(rng)
    }

    fn sample_stationary(&self, rng: &mut ChainRng) -> Option<f64> {
        Some(normal::draw(rng) / (1.0 - self.rho * self.rho).sqrt())
    }

    fn exact_stationary_mean(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// A real-valued functional `h` of the state, with an optional uniform bound.
#[derive(Clone)]
pub struct Functional {
    name: String,
    map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    bound: Option<f64>,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .finish()
    }
}

impl Functional {
    pub fn new(
        name: impl Into<String>,
        map: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bound: Option<f64>,
    ) -> Result<Self> {
        if let Some(d) = bound {
            crate::error::check_nonnegative("bound_D", d)?;
        }
        Ok(Self {
            name: name.into(),
            map: Arc::new(map),
            bound,
        })
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            map: Arc::new(|x| x),
            bound: None,
        }
    }

    /// `1{x ≥ 1}`, the functional `f` of the square-root-bias example.
    pub fn at_least_one() -> Self {
        Self {
            name: "at-least-one".into(),
            map: Arc::new(|x| if x >= 1.0 { 1.0 } else { 0.0 }),
            bound: Some(1.0),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            name: format!("const({value})"),
            map: Arc::new(move |_| value),
            bound: Some(value.abs()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.map)(x)
    }

    fn checked_eval(&self, x: f64) -> Result<f64> {
        let value = self.eval(x);
        match self.bound {
            Some(bound) if !(value.abs() <= bound) => Err(Error::BoundViolated {
                functional: self.name.clone(),
                value,
                bound,
            }),
            _ => Ok(value),
        }
    }
}

/// How `X_0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "state")]
pub enum StartMode {
    Fixed(f64),
    Stationary,
}

impl fmt::Display for StartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartMode::Fixed(x) => write!(f, "fixed({x})"),
            StartMode::Stationary => f.write_str("stationary"),
        }
    }
}

/// Realized values `h(X_1), …, h(X_n)` of one run, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalTrace {
    values: Vec<f64>,
    chain_id: String,
    start: StartMode,
    seed: SeedRecord,
}

impl FunctionalTrace {
    pub fn new(
        values: Vec<f64>,
        chain_id: impl Into<String>,
        start: StartMode,
        seed: SeedRecord,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("a trace needs at least one value".into()));
        }
        Ok(Self {
            values,
            chain_id: chain_id.into(),
            start,
            seed,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn chain_id(&self) -> &str {
        &self.chain_id
    }

    pub fn start(&self) -> StartMode {
        self.start
    }

    pub fn seed(&self) -> SeedRecord {
        self.seed
    }
}

fn initial_state<K: MarkovKernel>(
    kernel: &K,
    start: StartMode,
    rng: &mut ChainRng,
) -> Result<K::State> {
    match start {
        StartMode::Fixed(x) => K::State::from_f64(x)
            .filter(|&s| kernel.contains(s))
            .ok_or_else(|| Error::InvalidState {
                chain: kernel.chain_id().to_string(),
                state: x,
            }),
        StartMode::Stationary => {
            kernel
                .sample_stationary(rng)
                .ok_or_else(|| Error::NoStationarySampler {
                    chain: kernel.chain_id().to_string(),
                })
        }
    }
}

/// Runs `n` transitions, calling `visit(k, X_k)` for `k = 1..=n`.
pub fn walk<K, F>(kernel: &K, n: u64, start: StartMode, seed: SeedRecord, mut visit: F) -> Result<()>
where
    K: MarkovKernel,
    F: FnMut(u64, K::State) -> Result<()>,
{
    check_count("n", n)?;
    let mut rng = seed.rng();
    let mut state = initial_state(kernel, start, &mut rng)?;
    for k in 1..=n {
        state = kernel.step(state, &mut rng);
        visit(k, state)?;
    }
    Ok(())
}

/// Simulates `h(X_1), …, h(X_n)`. Fails if `h` exceeds its declared bound on
/// any visited state.
pub fn simulate_trace<K: MarkovKernel>(
    kernel: &K,
    h: &Functional,
    n: u64,
    start: StartMode,
    seed: SeedRecord,
) -> Result<FunctionalTrace> {
    let mut values = Vec::with_capacity(n as usize);
    walk(kernel, n, start, seed, |_, s| {
        values.push(h.checked_eval(s.to_f64())?);
        Ok(())
    })?;
    FunctionalTrace::new(values, kernel.chain_id(), start, seed)
}

/// Built-in chains, addressable by name from plans and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "chain")]
pub enum ChainSpec {
    TwoState { p01: f64, p10: f64 },
    Ar1 { rho: f64 },
    SqrtBias,
}

/// Built-in functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "functional", content = "value")]
pub enum FunctionalSpec {
    Identity,
    AtLeastOne,
    Constant(f64),
}

impl FunctionalSpec {
    pub fn build(&self) -> Functional {
        match *self {
            FunctionalSpec::Identity => Functional::identity(),
            FunctionalSpec::AtLeastOne => Functional::at_least_one(),
            FunctionalSpec::Constant(c) => Functional::constant(c),
        }
    }
}

/// One visited state and its functional value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub step: u64,
    pub state: f64,
    pub value: f64,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChainSpec::TwoState { p01, p10 } => make_two_state_kernel(p01, p10).map(drop),
            ChainSpec::Ar1 { rho } => make_ar1_kernel(rho).map(drop),
            ChainSpec::SqrtBias => Ok(()),
        }
    }

    pub fn chain_id(&self) -> String {
        match *self {
            ChainSpec::TwoState { p01, p10 } => format!("two-state(p01={p01},p10={p10})"),
            ChainSpec::Ar1 { rho } => format!("ar1(rho={rho})"),
            ChainSpec::SqrtBias => "sqrt-bias".into(),
        }
    }

    pub fn state_space(&self) -> StateSpace {
        match self {
            ChainSpec::Ar1 { .. } => StateSpace::RealLine,
            _ => StateSpace::CountableIntegers,
        }
    }

    /// π(h) for the built-in functionals, where it has a closed form.
    pub fn stationary_expectation(&self, functional: &FunctionalSpec) -> Result<f64> {
        let unknown = || Error::UnknownTruth {
            chain: self.chain_id(),
            functional: functional.build().name().to_string(),
        };
        match (*self, *functional) {
            (_, FunctionalSpec::Constant(c)) => Ok(c),
            (ChainSpec::TwoState { p01, p10 }, _) => Ok(make_two_state_kernel(p01, p10)?.stationary_one()),
            (ChainSpec::Ar1 { .. }, FunctionalSpec::Identity) => Ok(0.0),
            (ChainSpec::Ar1 { .. }, FunctionalSpec::AtLeastOne) => Err(unknown()),
            (ChainSpec::SqrtBias, _) => Ok(0.0),
        }
    }

    pub fn simulate_trace(
        &self,
        h: &Functional,
        n: u64,
        start: StartMode,
        seed: SeedRecord,
    ) -> Result<FunctionalTrace> {
        match *self {
            ChainSpec::TwoState { p01, p10 } => {
                simulate_trace(&make_two_state_kernel(p01, p10)?, h, n, start, seed)
            }
            ChainSpec::Ar1 { rho } => simulate_trace(&make_ar1_kernel(rho)?, h, n, start, seed),
            ChainSpec::SqrtBias => simulate_trace(&SqrtBiasKernel, h, n, start, seed),
        }
    }

    /// Full path `(k, X_k, h(X_k))` for `k = 1..=n`.
    pub fn simulate_path(
        &self,
        h: &Functional,
        n: u64,
        start: StartMode,
        seed: SeedRecord,
    ) -> Result<Vec<PathPoint>> {
        fn collect<K: MarkovKernel>(
            kernel: &K,
            h: &Functional,
            n: u64,
            start: StartMode,
            seed: SeedRecord,
        ) -> Result<Vec<PathPoint>> {
            let mut out = Vec::with_capacity(n as usize);
            walk(kernel, n, start, seed, |step, s| {
                let state = s.to_f64();
                out.push(PathPoint {
                    step,
                    state,
                    value: h.checked_eval(state)?,
                });
                Ok(())
            })?;
            Ok(out)
        }
        match *self {
            ChainSpec::TwoState { p01, p10 } => {
                collect(&make_two_state_kernel(p01, p10)?, h, n, start, seed)
            }
            ChainSpec::Ar1 { rho } => collect(&make_ar1_kernel(rho)?, h, n, start, seed),
            ChainSpec::SqrtBias => collect(&SqrtBiasKernel, h, n, start, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::uniform;

    #[test]
    fn sqrt_bias_transition_law() {
        let cut = 1.0 / 2f64.sqrt();
        assert_eq!(sqrt_bias_transition(0, 0.0), 0);
        assert_eq!(sqrt_bias_transition(0, 0.999), 0);
        assert_eq!(sqrt_bias_transition(1, cut - 1e-12), 2);
        assert_eq!(sqrt_bias_transition(1, cut + 1e-12), 0);
        assert_eq!(sqrt_bias_transition(1, 0.0), 2);
        // large states survive with probability close to one but not one
        assert_eq!(sqrt_bias_transition(1 << 40, 0.5), (1 << 40) + 1);
    }

    #[test]
    fn absorbed_state_is_fixed_for_any_draw() {
        let mut rng = SeedRecord::new(3, 0).rng();
        for _ in 0..100 {
            assert_eq!(step_sqrt_bias(0, &mut rng), 0);
        }
    }

    #[test]
    fn tail_probability_values() {
        assert_eq!(tail_probability_sqrt_bias(3).unwrap(), 0.5);
        assert!((tail_probability_sqrt_bias(1).unwrap() - 0.707_106_781_186_547_5).abs() < 1e-15);
        // 1/sqrt(100), mpmath
        assert!((tail_probability_sqrt_bias(99).unwrap() - 0.1).abs() < 1e-16);
        assert!(tail_probability_sqrt_bias(0).is_err());
    }

    #[test]
    fn exact_bias_values() {
        assert!((exact_bias_sqrt_bias(1).unwrap() - 0.707_106_781_186_547_5).abs() < 1e-15);
        // mpmath: (1/3)(1/sqrt2 + 1/sqrt3 + 1/sqrt4)
        assert!((exact_bias_sqrt_bias(3).unwrap() - 0.594_819_016_792_057_8).abs() < 1e-15);
        // mpmath, 40 digits
        assert!((exact_bias_sqrt_bias(10).unwrap() - 0.432_250_924_387_043_0).abs() < 1e-15);
        assert!((exact_bias_sqrt_bias(100).unwrap() - 0.176_891_075_438_051_5).abs() < 1e-15);
        let b = exact_bias_sqrt_bias(1_000_000).unwrap();
        assert!((9.99999e-4..=2.0e-3).contains(&b));
        assert!(exact_bias_sqrt_bias(0).is_err());
    }

    #[test]
    fn bias_table_matches_direct_sum() {
        let table = exact_bias_sqrt_bias_table(500).unwrap();
        for n in [1u64, 2, 3, 17, 100, 500] {
            let direct = exact_bias_sqrt_bias(n).unwrap();
            assert!((table[n as usize - 1] - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn sqrt_bias_tail_frequency_at_three() {
        let paths = 100_000u64;
        let mut alive = 0u64;
        for i in 0..paths {
            let mut last = 0;
            walk(&SqrtBiasKernel, 3, StartMode::Fixed(1.0), SeedRecord::new(11, i), |_, s| {
                last = s;
                Ok(())
            })
            .unwrap();
            alive += u64::from(last != 0);
        }
        let freq = alive as f64 / paths as f64;
        assert!((freq - 0.5).abs() <= 3.0 * (0.25 / paths as f64).sqrt(), "freq={freq}");
    }

    #[test]
    fn kernel_constructors_validate() {
        assert!(make_two_state_kernel(0.0, 0.5).is_err());
        assert!(make_two_state_kernel(0.5, 1.5).is_err());
        assert!(make_two_state_kernel(f64::NAN, 0.5).is_err());
        assert!(make_two_state_kernel(1.0, 1.0).is_ok());
        assert!(make_ar1_kernel(1.0).is_err());
        assert!(make_ar1_kernel(-1.0).is_err());
        assert!(make_ar1_kernel(f64::NAN).is_err());
        assert!(make_ar1_kernel(0.99).is_ok());
    }

    #[test]
    fn two_state_stationary_means() {
        let k = make_two_state_kernel(0.5, 0.5).unwrap();
        assert_eq!(k.exact_stationary_mean(), Some(0.5));
        let k = make_two_state_kernel(0.1, 0.3).unwrap();
        assert!((k.exact_stationary_mean().unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(k.less_likely_state(), 1);
    }

    #[test]
    fn symmetric_two_state_has_independent_consecutive_states() {
        // With p01 = p10 = 1/2 the next state is a fair coin regardless of
        // the current one.
        let k = make_two_state_kernel(0.5, 0.5).unwrap();
        let mut rng = SeedRecord::new(5, 0).rng();
        let mut counts = [[0u64; 2]; 2];
        let mut s = 0u64;
        for _ in 0..200_000 {
            let t = k.step(s, &mut rng);
            counts[s as usize][t as usize] += 1;
            s = t;
        }
        for row in counts {
            let total = (row[0] + row[1]) as f64;
            let p = row[1] as f64 / total;
            assert!((p - 0.5).abs() < 4.0 * (0.25 / total).sqrt());
        }
    }

    #[test]
    fn simulate_is_deterministic_and_checks_start() {
        let h = Functional::at_least_one();
        let a = simulate_trace(&SqrtBiasKernel, &h, 5, StartMode::Fixed(1.0), SeedRecord::new(42, 0)).unwrap();
        let b = simulate_trace(&SqrtBiasKernel, &h, 5, StartMode::Fixed(1.0), SeedRecord::new(42, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|&v| v == 0.0 || v == 1.0));
        // once absorbed the trace stays at zero
        let first_zero = a.values().iter().position(|&v| v == 0.0);
        if let Some(k) = first_zero {
            assert!(a.values()[k..].iter().all(|&v| v == 0.0));
        }

        let k = make_two_state_kernel(0.5, 0.5).unwrap();
        let err = simulate_trace(&k, &h, 5, StartMode::Fixed(2.0), SeedRecord::new(1, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidState { .. }));
        let err = simulate_trace(&SqrtBiasKernel, &h, 5, StartMode::Fixed(-1.0), SeedRecord::new(1, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidState { .. }));
        let err = simulate_trace(&SqrtBiasKernel, &h, 0, StartMode::Fixed(1.0), SeedRecord::new(1, 0)).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
    }

    struct NoSampler;

    impl MarkovKernel for NoSampler {
        type State = f64;
        fn chain_id(&self) -> &str {
            "no-sampler"
        }
        fn state_space(&self) -> StateSpace {
            StateSpace::RealLine
        }
        fn step(&self, state: f64, rng: &mut ChainRng) -> f64 {
            0.5 * state + uniform(rng)
        }
    }

    #[test]
    fn stationary_start_requires_sampler() {
        let err = simulate_trace(&NoSampler, &Functional::identity(), 3, StartMode::Stationary, SeedRecord::new(0, 0))
            .unwrap_err();
        assert!(matches!(err, Error::NoStationarySampler { .. }));
        assert!(simulate_trace(&NoSampler, &Functional::identity(), 3, StartMode::Fixed(0.0), SeedRecord::new(0, 0)).is_ok());
    }

    #[test]
    fn declared_bound_is_enforced() {
        let h = Functional::new("tight", |x| x, Some(0.5)).unwrap();
        let k = make_two_state_kernel(1.0, 1.0).unwrap();
        let err = simulate_trace(&k, &h, 4, StartMode::Fixed(0.0), SeedRecord::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::BoundViolated { .. }));
        assert!(Functional::new("neg", |x| x, Some(-1.0)).is_err());
    }

    #[test]
    fn two_state_mean_is_near_half() {
        let k = make_two_state_kernel(0.5, 0.5).unwrap();
        let n = 100_000u64;
        let t = simulate_trace(&k, &Functional::identity(), n, StartMode::Fixed(0.0), SeedRecord::new(8, 0)).unwrap();
        let mean = crate::sum::sum(t.values()) / n as f64;
        assert!((mean - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt(), "mean={mean}");
    }

    #[test]
    fn ar1_iid_mean_is_near_zero() {
        let k = make_ar1_kernel(0.0).unwrap();
        let n = 100_000u64;
        let t = simulate_trace(&k, &Functional::identity(), n, StartMode::Fixed(0.0), SeedRecord::new(9, 0)).unwrap();
        let mean = crate::sum::sum(t.values()) / n as f64;
        assert!(mean.abs() <= 3.0 / (n as f64).sqrt(), "mean={mean}");
    }

    #[test]
    fn spec_truths() {
        let ts = ChainSpec::TwoState { p01: 0.1, p10: 0.3 };
        assert!((ts.stationary_expectation(&FunctionalSpec::Identity).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(ChainSpec::SqrtBias.stationary_expectation(&FunctionalSpec::AtLeastOne).unwrap(), 0.0);
        assert_eq!(
            ChainSpec::Ar1 { rho: 0.3 }.stationary_expectation(&FunctionalSpec::Constant(2.5)).unwrap(),
            2.5
        );
        assert!(matches!(
            ChainSpec::Ar1 { rho: 0.3 }.stationary_expectation(&FunctionalSpec::AtLeastOne),
            Err(Error::UnknownTruth { .. })
        ));
    }

    #[test]
    fn path_and_trace_agree() {
        let spec = ChainSpec::Ar1 { rho: 0.5 };
        let h = Functional::identity();
        let seed = SeedRecord::new(77, 2);
        let path = spec.simulate_path(&h, 50, StartMode::Stationary, seed).unwrap();
        let trace = spec.simulate_trace(&h, 50, StartMode::Stationary, seed).unwrap();
        let from_path: Vec<f64> = path.iter().map(|p| p.value).collect();
        assert_eq!(from_path, trace.values());
        assert_eq!(path.first().unwrap().step, 1);
        assert_eq!(path.last().unwrap().step, 50);
    }
}
