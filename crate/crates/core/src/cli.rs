//! The `mcci` command-line front end.
//!
//! Every subcommand produces a table rendered as CSV (default), JSON lines or
//! aligned text. Machine formats print reals with 17 significant digits so
//! values round-trip; text output uses 4.
//!
//! `--config FILE` reads `key = value` lines whose keys are flag names
//! without the leading dashes. Values from the file are inserted before the
//! command-line flags, so explicit flags win.
//!
//! Exit statuses: 0 success, 2 usage error, 3 invalid parameter, 4 order too
//! low for a bias bound, 5 missing `--seed` on a stochastic command, 6 I/O or
//! config-file error, 7 no known truth or stationary sampler, 8 insufficient
//! or mismatched data, 9 functional bound violated.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bias::{bias_bound_t4, fit_bias_rate, BetaPolicy, PolyErgodicityCert};
use crate::chains::{exact_bias_sqrt_bias_table, ChainSpec, FunctionalSpec, StartMode, StateSpace};
use crate::coverage::{
    compare_methods, BiasSpec, CoverageReport, ExperimentPlan, IntervalMethod, MomentSpec, VarianceSpec,
};
use crate::error::Error;
use crate::intervals::{
    clt_reference_interval, enlarge_t5, interval_c1, interval_t1, interval_t2, interval_t3,
    ConfidenceInterval, DEFAULT_EPSILON,
};
use crate::rng::SeedRecord;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("missing --seed: `{0}` is stochastic and has no default seed")]
    MissingSeed(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("cannot write `{path}`: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file: {0}")]
    Config(String),
    #[error(transparent)]
    Usage(#[from] clap::Error),
}

impl CliError {
    fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            name,
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Invalid { .. } => 3,
            CliError::MissingSeed(_) => 5,
            CliError::Output { .. } | CliError::Config(_) => 6,
            CliError::Core(e) => match e {
                Error::InvalidParameter { .. } | Error::InvalidState { .. } => 3,
                Error::OrderTooLow { .. } => 4,
                Error::NoStationarySampler { .. } | Error::UnknownTruth { .. } => 7,
                Error::InsufficientData(_) | Error::MismatchedTraces(_) | Error::PlanMismatch(_) => 8,
                Error::BoundViolated { .. } => 9,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "mcci",
    version,
    about = "CLT-free confidence intervals, bias bounds and coverage experiments for MCMC",
    args_override_self = true
)]
struct Cli {
    /// Flat `key = value` file of default flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one confidence interval from summary numbers.
    Interval(IntervalArgs),
    /// Bias bound C from a polynomial-ergodicity certificate.
    BiasBound(BiasBoundArgs),
    /// Simulate one chain path and write (step, state, h) rows.
    Simulate(SimulateArgs),
    /// Empirical coverage of one or more interval methods.
    Coverage(CoverageArgs),
    /// Exact bias of the sqrt-bias chain over a geometric grid, with fitted slope.
    BiasSweep(BiasSweepArgs),
    /// Coverage and mean width of methods side by side with the CLT interval.
    CompareWidths(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
    Text,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodName {
    T1,
    T2,
    C1,
    T3,
    #[value(name = "t5-enlarge")]
    T5Enlarge,
    #[value(name = "clt-ref")]
    CltRef,
}

#[derive(Debug, Args)]
struct IntervalArgs {
    #[arg(long, value_enum)]
    method: MethodName,
    /// Point estimate e_n.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    center: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long = "C")]
    c_bias: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    gamma: Option<f64>,
    /// Enlargement constant; defaults to epsilon * B / sqrt(alpha).
    #[arg(long = "c")]
    c_enlarge: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BetaPolicyName {
    Optimal,
    Fixed,
}

#[derive(Debug, Args)]
struct BiasBoundArgs {
    #[arg(long)]
    m: f64,
    #[arg(long = "Mx")]
    m_x: f64,
    #[arg(long = "D")]
    d: f64,
    #[arg(long)]
    n: u64,
    /// Fixed beta in (0.5, 1); implies --beta-policy fixed.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_enum, default_value = "optimal")]
    beta_policy: BetaPolicyName,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChainName {
    TwoState,
    Ar1,
    SqrtBias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FunctionalName {
    Identity,
    AtLeastOne,
    Const,
}

#[derive(Debug, Args)]
struct ChainArgs {
    #[arg(long, value_enum)]
    chain: ChainName,
    #[arg(long, default_value_t = 0.5)]
    p01: f64,
    #[arg(long, default_value_t = 0.5)]
    p10: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    rho: f64,
    /// Defaults to at-least-one for sqrt-bias and identity otherwise.
    #[arg(long, value_enum)]
    functional: Option<FunctionalName>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    const_value: f64,
    /// `stationary` or a state; defaults to 1 for sqrt-bias and stationary otherwise.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ChainArgs {
    fn chain(&self) -> ChainSpec {
        match self.chain {
            ChainName::TwoState => ChainSpec::TwoState {
                p01: self.p01,
                p10: self.p10,
            },
            ChainName::Ar1 => ChainSpec::Ar1 { rho: self.rho },
            ChainName::SqrtBias => ChainSpec::SqrtBias,
        }
    }

    fn functional(&self) -> FunctionalSpec {
        match self.functional {
            Some(FunctionalName::Identity) => FunctionalSpec::Identity,
            Some(FunctionalName::AtLeastOne) => FunctionalSpec::AtLeastOne,
            Some(FunctionalName::Const) => FunctionalSpec::Constant(self.const_value),
            None if self.chain == ChainName::SqrtBias => FunctionalSpec::AtLeastOne,
            None => FunctionalSpec::Identity,
        }
    }

    fn start(&self) -> CliResult<StartMode> {
        match self.start.as_deref() {
            None if self.chain == ChainName::SqrtBias => Ok(StartMode::Fixed(1.0)),
            None | Some("stationary") => Ok(StartMode::Stationary),
            Some(s) => s
                .parse::<f64>()
                .map(StartMode::Fixed)
                .map_err(|_| CliError::invalid("start", format!("expected `stationary` or a number, got `{s}`"))),
        }
    }

    fn seed(&self, command: &'static str) -> CliResult<u64> {
        self.seed.ok_or(CliError::MissingSeed(command))
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BiasSourceName {
    Exact,
    Poly,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    replications: u64,
    /// One or more methods, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    method: Vec<MethodName>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Assumed B; otherwise estimated from --oracle-runs under --oracle-seed.
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long)]
    oracle_runs: Option<u64>,
    #[arg(long)]
    oracle_seed: Option<u64>,
    /// Multiplier applied to an estimated B².
    #[arg(long, default_value_t = 1.0)]
    inflation: f64,
    /// Assumed bias bound C for t2.
    #[arg(long = "C")]
    c_bias: Option<f64>,
    /// Derived bias bound for t2 instead of --C.
    #[arg(long, value_enum)]
    bias: Option<BiasSourceName>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long = "Mx")]
    m_x: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Enlargement constant for t5-enlarge.
    #[arg(long = "c", default_value_t = 1.0)]
    c_enlarge: f64,
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BiasSweepArgs {
    #[arg(long, value_enum, default_value = "sqrt-bias")]
    chain: ChainName,
    /// start:stop:points-per-decade, e.g. 1e3:1e6:4
    #[arg(long, default_value = "1e3:1e6:4")]
    n_grid: String,
    #[command(flatten)]
    out: OutputArgs,
}

// ---------------------------------------------------------------------------
// Tables

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Jsonl => self.render_jsonl(),
            Format::Text => self.render_text(),
        }
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(machine_text)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    fn render_jsonl(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push('{');
            for (i, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let value = match cell {
                    Cell::Int(v) => v.to_string(),
                    Cell::Num(v) if v.is_finite() => format_sig(*v, 17),
                    Cell::Num(_) | Cell::Empty => "null".to_string(),
                    Cell::Text(s) => serde_json::to_string(s).expect("string encodes"),
                };
                let _ = write!(out, "{}:{}", serde_json::to_string(name).expect("string encodes"), value);
            }
            out.push_str("}\n");
        }
        out
    }

    fn render_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Int(v) => v.to_string(),
                        Cell::Num(v) => format_sig(*v, 4),
                        Cell::Text(s) => s.clone(),
                        Cell::Empty => "-".to_string(),
                    })
                    .collect()
            })
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| cells.iter().map(|r| r[i].len()).chain([name.len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &mut dyn Iterator<Item = &str>| {
            let parts: Vec<String> = items
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            out.push_str(parts.join("  ").trim_end());
            out.push('\n');
        };
        line(&mut out, &mut self.columns.iter().copied());
        for row in &cells {
            line(&mut out, &mut row.iter().map(String::as_str));
        }
        out
    }
}

fn machine_text(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Num(v) => format_sig(*v, 17),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

/// Renders `x` with `digits` significant digits, positional for moderate
/// exponents and scientific otherwise.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn emit(table: &Table, out: &OutputArgs) -> CliResult<()> {
    let text = table.render(out.format);
    match &out.output {
        Some(path) => write_file(path, &text),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| CliError::Output {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Commands

fn require(name: &'static str, value: Option<f64>, method: &str) -> CliResult<f64> {
    value.ok_or_else(|| CliError::invalid(name, format!("required by method `{method}`")))
}

const INTERVAL_COLUMNS: &[&str] = &[
    "method",
    "kind",
    "n",
    "alpha",
    "center",
    "lower",
    "upper",
    "half_width_lower",
    "half_width_upper",
    "width",
    "delta",
    "a_n",
    "epsilon",
    "B",
    "C",
    "gamma_n",
    "c",
    "r",
];

fn cmd_interval(args: &IntervalArgs) -> CliResult<Table> {
    let name = method_name(args.method);
    let (e_n, n, alpha) = (args.center, args.n, args.alpha);
    let mut epsilon = None;
    let mut b = None;
    let mut c_bias = None;
    let mut gamma = None;
    let mut enlarge = None;
    let ci: ConfidenceInterval = match args.method {
        MethodName::T1 => {
            let bv = require("B", args.b, name)?;
            epsilon = Some(args.epsilon);
            b = Some(bv);
            interval_t1(e_n, n, alpha, bv, args.epsilon)?
        }
        MethodName::T2 | MethodName::C1 => {
            let bv = require("B", args.b, name)?;
            b = Some(bv);
            let cv = if args.method == MethodName::T2 {
                require("C", args.c_bias, name)?
            } else {
                0.0
            };
            c_bias = Some(cv);
            if args.method == MethodName::T2 {
                interval_t2(e_n, n, alpha, bv, cv)?
            } else {
                interval_c1(e_n, n, alpha, bv)?
            }
        }
        MethodName::T3 => {
            let g = require("gamma", args.gamma, name)?;
            gamma = Some(g);
            interval_t3(e_n, n, g, alpha)?
        }
        MethodName::T5Enlarge => {
            let bv = require("B", args.b, name)?;
            b = Some(bv);
            let c = args.c_enlarge.unwrap_or(args.epsilon * bv / alpha.sqrt());
            if args.c_enlarge.is_none() {
                epsilon = Some(args.epsilon);
            }
            enlarge = Some((c, args.r));
            enlarge_t5(&interval_c1(e_n, n, alpha, bv)?, c, args.r, n)?
        }
        MethodName::CltRef => {
            let bv = require("B", args.b, name)?;
            b = Some(bv);
            clt_reference_interval(e_n, n, alpha, bv)?
        }
    };
    let a_n = matches!(args.method, MethodName::T2 | MethodName::C1).then_some(ci.half_width_upper);
    let mut table = Table::new(INTERVAL_COLUMNS);
    table.push(vec![
        name.into(),
        ci.kind.as_str().into(),
        ci.n.into(),
        ci.alpha.into(),
        ci.center.into(),
        ci.lower().into(),
        ci.upper().into(),
        ci.half_width_lower.into(),
        ci.half_width_upper.into(),
        ci.width().into(),
        ci.delta.into(),
        a_n.into(),
        epsilon.into(),
        b.into(),
        c_bias.into(),
        gamma.into(),
        enlarge.map(|e| e.0).into(),
        enlarge.map(|e| e.1).into(),
    ]);
    Ok(table)
}

fn cmd_bias_bound(args: &BiasBoundArgs) -> CliResult<Table> {
    let cert = PolyErgodicityCert::new(args.m, args.m_x, args.d)?;
    let policy = match (args.beta, args.beta_policy) {
        (Some(b), _) => BetaPolicy::Fixed(b),
        (None, BetaPolicyName::Fixed) => {
            return Err(CliError::invalid("beta", "--beta-policy fixed needs --beta"));
        }
        (None, BetaPolicyName::Optimal) => BetaPolicy::Optimal,
    };
    let bound = bias_bound_t4(&cert, args.n, policy)?;
    let mut table = Table::new(&["C", "n", "m", "Mx", "D", "provenance", "beta_used"]);
    table.push(vec![
        bound.c.into(),
        bound.n.into(),
        args.m.into(),
        args.m_x.into(),
        args.d.into(),
        bound.provenance.as_str().into(),
        bound.beta_used.into(),
    ]);
    Ok(table)
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<Table> {
    let seed = args.chain.seed("simulate")?;
    let chain = args.chain.chain();
    chain.validate()?;
    let h = args.chain.functional().build();
    let path = chain.simulate_path(&h, args.n, args.chain.start()?, SeedRecord::new(seed, 0))?;
    let integer = chain.state_space() == StateSpace::CountableIntegers;
    let mut table = Table::new(&["step", "state", "h"]);
    for p in path {
        let state = if integer { Cell::Int(p.state as u64) } else { Cell::Num(p.state) };
        table.push(vec![p.step.into(), state, p.value.into()]);
    }
    Ok(table)
}

fn method_name(m: MethodName) -> &'static str {
    match m {
        MethodName::T1 => "t1",
        MethodName::T2 => "t2",
        MethodName::C1 => "c1",
        MethodName::T3 => "t3",
        MethodName::T5Enlarge => "t5-enlarge",
        MethodName::CltRef => "clt-ref",
    }
}

fn coverage_plans(args: &CoverageArgs, methods: &[MethodName], command: &'static str) -> CliResult<Vec<ExperimentPlan>> {
    let master_seed = args.chain.seed(command)?;
    let chain = args.chain.chain();
    let functional = args.chain.functional();
    let start = args.chain.start()?;
    let alpha = args.alpha;

    let variance = || -> CliResult<VarianceSpec> {
        match (args.b, args.oracle_runs, args.oracle_seed) {
            (Some(b), _, _) => Ok(VarianceSpec::Assumed { b_squared: b * b }),
            (None, Some(runs), Some(seed)) => Ok(VarianceSpec::RepeatedRuns {
                runs,
                seed,
                inflation: args.inflation,
            }),
            _ => Err(CliError::invalid(
                "B",
                "give --B, or --oracle-runs with --oracle-seed to estimate it",
            )),
        }
    };
    let bias = || -> CliResult<BiasSpec> {
        match (args.c_bias, args.bias) {
            (Some(c), None) => Ok(BiasSpec::Assumed { c }),
            (None, Some(BiasSourceName::Exact)) => Ok(BiasSpec::ExactSqrtBias),
            (None, Some(BiasSourceName::Poly)) => {
                let cert = PolyErgodicityCert::new(
                    require("m", args.m, "t2 --bias poly")?,
                    require("Mx", args.m_x, "t2 --bias poly")?,
                    require("D", args.d, "t2 --bias poly")?,
                )?;
                let beta = args.beta.map_or(BetaPolicy::Optimal, BetaPolicy::Fixed);
                Ok(BiasSpec::PolyErgodic { cert, beta })
            }
            (Some(_), Some(_)) => Err(CliError::invalid("C", "give either --C or --bias, not both")),
            (None, None) => Err(CliError::invalid("C", "t2 needs --C or --bias exact|poly")),
        }
    };
    let moment = || -> CliResult<MomentSpec> {
        match (args.gamma, args.oracle_runs, args.oracle_seed) {
            (Some(gamma_n), _, _) => Ok(MomentSpec::Assumed { gamma_n }),
            (None, Some(runs), Some(seed)) => Ok(MomentSpec::RepeatedRuns { runs, seed }),
            _ => Err(CliError::invalid(
                "gamma",
                "give --gamma, or --oracle-runs with --oracle-seed to estimate it",
            )),
        }
    };

    methods
        .iter()
        .map(|&m| {
            let method = match m {
                MethodName::T1 => IntervalMethod::T1 {
                    alpha,
                    epsilon: args.epsilon,
                    variance: variance()?,
                },
                MethodName::T2 => IntervalMethod::T2 {
                    alpha,
                    variance: variance()?,
                    bias: bias()?,
                },
                MethodName::C1 => IntervalMethod::C1 {
                    alpha,
                    variance: variance()?,
                },
                MethodName::T3 => IntervalMethod::T3 {
                    alpha,
                    moment: moment()?,
                },
                MethodName::CltRef => IntervalMethod::CltReference {
                    alpha,
                    variance: variance()?,
                },
                MethodName::T5Enlarge => IntervalMethod::T5Enlarged {
                    alpha,
                    variance: variance()?,
                    c: args.c_enlarge,
                    r: args.r,
                },
            };
            Ok(ExperimentPlan {
                chain,
                functional,
                n: args.n,
                replications: args.replications,
                start,
                method,
                master_seed,
            })
        })
        .collect()
}

const COVERAGE_COLUMNS: &[&str] = &[
    "method",
    "kind",
    "chain",
    "functional",
    "start",
    "n",
    "replications",
    "hits",
    "empirical_coverage",
    "mc_standard_error",
    "mean_width",
    "truth",
    "alpha",
    "B_squared",
    "C",
    "gamma_n",
    "seed",
];

fn coverage_row(r: &CoverageReport) -> Vec<Cell> {
    vec![
        r.plan.method.name().into(),
        r.kind.as_str().into(),
        r.plan.chain.chain_id().into(),
        r.plan.functional.build().name().into(),
        r.plan.start.to_string().into(),
        r.plan.n.into(),
        r.replications.into(),
        r.hits.into(),
        r.empirical_coverage.into(),
        r.mc_standard_error.into(),
        r.mean_width.into(),
        r.truth.into(),
        r.plan.method.alpha().into(),
        r.b_squared.into(),
        r.c.into(),
        r.gamma_n.into(),
        r.plan.master_seed.into(),
    ]
}

fn cmd_coverage(args: &CoverageArgs) -> CliResult<Table> {
    let plans = coverage_plans(args, &args.method, "coverage")?;
    let reports = compare_methods(&plans)?;
    let mut table = Table::new(COVERAGE_COLUMNS);
    for r in &reports {
        table.push(coverage_row(r));
    }
    Ok(table)
}

fn cmd_compare_widths(args: &CoverageArgs) -> CliResult<Table> {
    let mut methods: Vec<MethodName> = args
        .method
        .iter()
        .copied()
        .filter(|&m| m != MethodName::CltRef)
        .collect();
    methods.push(MethodName::CltRef);
    let plans = coverage_plans(args, &methods, "compare-widths")?;
    let reports = compare_methods(&plans)?;
    let clt_width = reports.last().expect("clt-ref plan present").mean_width;
    let mut columns = COVERAGE_COLUMNS.to_vec();
    columns.push("width_ratio_vs_clt");
    let mut table = Table::new(&columns);
    for r in &reports {
        let mut row = coverage_row(r);
        row.push(Cell::Num(r.mean_width / clt_width));
        table.push(row);
    }
    Ok(table)
}

/// Parses `start:stop:points-per-decade` into a strictly increasing,
/// log-uniform grid of integers.
pub fn parse_n_grid(spec: &str) -> Result<Vec<u64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, per_decade] = parts.as_slice() else {
        return Err(format!("expected start:stop:points-per-decade, got `{spec}`"));
    };
    let start: f64 = start.parse().map_err(|_| format!("bad start `{start}`"))?;
    let stop: f64 = stop.parse().map_err(|_| format!("bad stop `{stop}`"))?;
    let per_decade: u32 = per_decade
        .parse()
        .map_err(|_| format!("bad points-per-decade `{per_decade}`"))?;
    if !(start >= 1.0 && stop >= start && stop.is_finite()) || per_decade == 0 {
        return Err(format!("need 1 <= start <= stop and points-per-decade >= 1, got `{spec}`"));
    }
    let (lo, hi) = (start.log10(), stop.log10());
    let steps = ((hi - lo) * per_decade as f64 + 1e-9).floor() as u64;
    let mut grid: Vec<u64> = (0..=steps)
        .map(|j| 10f64.powf(lo + j as f64 / per_decade as f64).round() as u64)
        .collect();
    grid.dedup();
    Ok(grid)
}

fn cmd_bias_sweep(args: &BiasSweepArgs) -> CliResult<Table> {
    if args.chain != ChainName::SqrtBias {
        return Err(CliError::invalid("chain", "exact bias is only available for sqrt-bias"));
    }
    let grid = parse_n_grid(&args.n_grid).map_err(|reason| CliError::invalid("n-grid", reason))?;
    let table_all = exact_bias_sqrt_bias_table(*grid.last().expect("nonempty grid"))?;
    let biases: Vec<f64> = grid.iter().map(|&n| table_all[n as usize - 1]).collect();
    let slope = if grid.len() >= 3 {
        Some(fit_bias_rate(&grid, &biases)?)
    } else {
        None
    };
    let mut table = Table::new(&["n", "exact_bias", "lower_bound", "upper_bound", "slope"]);
    for (&n, &b) in grid.iter().zip(&biases) {
        let nf = n as f64;
        table.push(vec![
            n.into(),
            b.into(),
            (1.0 / (nf + 1.0).sqrt()).into(),
            (2.0 / nf.sqrt()).into(),
            slope.into(),
        ]);
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Entry points

fn config_args(path: &Path) -> CliResult<Vec<OsString>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .or_else(|| line.split_once(char::is_whitespace).map(|(k, v)| (k.trim(), v.trim())))
            .unwrap_or((line, ""));
        if key.is_empty() || key.starts_with('-') {
            return Err(CliError::Config(format!("line {}: bad key in `{raw}`", lineno + 1)));
        }
        out.push(OsString::from(format!("--{key}")));
        if !value.is_empty() {
            out.push(OsString::from(value));
        }
    }
    Ok(out)
}

/// Splices `--config` file entries in right after the subcommand name so
/// flags given on the command line override them.
fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut iter = args.into_iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            config = iter.next().map(PathBuf::from);
            if config.is_none() {
                return Err(CliError::Config("--config needs a file".into()));
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let extra = config_args(&path)?;
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(rest.len());
    rest.splice(sub..sub, extra);
    Ok(rest)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = expand_config(args.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(args)?;
    let (table, out) = match &cli.command {
        Command::Interval(a) => (cmd_interval(a)?, &a.out),
        Command::BiasBound(a) => (cmd_bias_bound(a)?, &a.out),
        Command::Simulate(a) => (cmd_simulate(a)?, &a.out),
        Command::Coverage(a) => (cmd_coverage(a)?, &a.out),
        Command::BiasSweep(a) => (cmd_bias_sweep(a)?, &a.out),
        Command::CompareWidths(a) => (cmd_compare_widths(a)?, &a.out),
    };
    emit(&table, out)
}

/// Runs the CLI and returns the process exit status, reporting errors on
/// standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match run(args) {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("mcci: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(3.424_249_319_134_619, 4), "3.424");
        assert_eq!(format_sig(0.5, 17), "0.50000000000000000");
        assert_eq!(format_sig(1.0 / 3.0, 17), "0.33333333333333331");
        assert_eq!(format_sig(1234.6, 4), "1235");
        assert_eq!(format_sig(1e-7, 4), "1.000e-7");
        assert_eq!(format_sig(-2.5e20, 4), "-2.500e20");
        assert_eq!(format_sig(0.0, 17), "0");
        // round trip at 17 digits
        for &x in &[0.1, 2.0f64.sqrt(), 7.510_890_260_119_674e-5, 1e300, -3.3e-200] {
            assert_eq!(format_sig(x, 17).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn n_grid_parsing() {
        assert_eq!(
            parse_n_grid("1e3:1e6:4").unwrap(),
            vec![1000, 1778, 3162, 5623, 10_000, 17_783, 31_623, 56_234, 100_000, 177_828, 316_228, 562_341, 1_000_000]
        );
        assert_eq!(parse_n_grid("1:100:1").unwrap(), vec![1, 10, 100]);
        assert_eq!(parse_n_grid("1:3:20").unwrap(), vec![1, 2, 3]);
        assert!(parse_n_grid("0:10:1").is_err());
        assert!(parse_n_grid("10:1:1").is_err());
        assert!(parse_n_grid("1:10").is_err());
        assert!(parse_n_grid("1:10:0").is_err());
    }

    #[test]
    fn formats_carry_same_fields() {
        let mut t = Table::new(&["a", "b", "c", "d"]);
        t.push(vec![Cell::Int(3), Cell::Num(0.25), Cell::Text("x,y".into()), Cell::Empty]);
        let csv = t.render(Format::Csv);
        assert_eq!(csv, "a,b,c,d\n3,0.25000000000000000,\"x,y\",\n");
        let json = t.render(Format::Jsonl);
        assert_eq!(json, "{\"a\":3,\"b\":0.25000000000000000,\"c\":\"x,y\",\"d\":null}\n");
        let v: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
        assert_eq!(v["b"], 0.25);
    }

    #[test]
    fn config_is_spliced_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# defaults\nn = 100\nalpha=0.1\nB 2\n").unwrap();
        let args: Vec<OsString> = ["mcci", "interval", "--config", path.to_str().unwrap(), "--alpha", "0.05"]
            .iter()
            .map(OsString::from)
            .collect();
        let expanded = expand_config(args).unwrap();
        let strs: Vec<String> = expanded.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(
            strs,
            ["mcci", "interval", "--n", "100", "--alpha", "0.1", "--B", "2", "--alpha", "0.05"]
        );
    }
}
