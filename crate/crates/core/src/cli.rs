//! The `cfdim` command line.
//!
//! Settings resolve as flags, then `CFDIM_*` environment variables, then a TOML file
//! (`--config` or `CFDIM_CONFIG`), then defaults. Exit codes: 0 success, 2 domain or
//! hypothesis errors, 3 budget exhaustion, 64 malformed input.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use crate::empirical::{
    band_counts, boxcount_sample, build_cover, covering_estimate, dyadic_scales, falconer_estimate, fm_cover,
    fm_stopping_cover, verify_lemma_np, wang_wu_s_n, CoverLevel, CoverScheme, DigitSource, LemmaMode, LemmaOptions,
    WangWuOptions,
};
use crate::error::{Error, Result};
use crate::pressure::{
    pressure_full, pressure_refine, pressure_restricted, DepthSweep, DigitCap, Method, OperatorGrid, PressureBracket,
    PressureConfig, PressureQuery, RefineBudget,
};
use crate::profile::{
    classify_sum_function, function_profile, growth_profile, ExtReal, FunctionHorizon, Generator, Overrides,
    SequenceTriple,
};
use crate::solve::{
    dim_E, dim_EL, dim_F_N, dim_liao_rams, dim_liminf_max, dim_limsup_family, dim_sum_family, liao_rams_trace,
    profile_function, solve_pressure_equation, DimensionResult, LimsupFamily, PressureEquation, PressureSource, Rhs,
    SolveOptions, SumFamily,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tol: f64,
    pub enumeration_cap: u64,
    pub grid: usize,
    pub k_max: usize,
    pub n_max: f64,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            enumeration_cap: PressureConfig::default().enumeration_cap,
            grid: OperatorGrid::default().size,
            k_max: 64,
            n_max: 1e30,
            format: Format::Json,
            seed: 0,
            threads: None,
        }
    }
}

/// One layer of optional settings.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct Layer {
    tol: Option<f64>,
    enumeration_cap: Option<u64>,
    grid: Option<usize>,
    k_max: Option<usize>,
    n_max: Option<f64>,
    format: Option<Format>,
    seed: Option<u64>,
    threads: Option<usize>,
}

impl RunConfig {
    fn apply(&mut self, l: &Layer) {
        macro_rules! take {
            ($($f:ident),*) => {$( if let Some(v) = l.$f { self.$f = v; } )*};
        }
        take!(tol, enumeration_cap, grid, k_max, n_max, format, seed);
        if l.threads.is_some() {
            self.threads = l.threads;
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::domain("tol must be positive"));
        }
        if self.enumeration_cap == 0 || self.grid < 8 || self.k_max < 8 || !(self.n_max > 16.0) {
            return Err(Error::domain(
                "enumeration_cap must be positive, grid >= 8, k_max >= 8 and n_max > 16",
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("threads must be positive"));
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        let mut o = SolveOptions::with_tol(self.tol);
        o.pressure = self.pressure_config();
        o
    }

    fn pressure_config(&self) -> PressureConfig {
        PressureConfig {
            enumeration_cap: self.enumeration_cap,
            grid: OperatorGrid {
                size: self.grid,
                ..OperatorGrid::default()
            },
            ..PressureConfig::default()
        }
    }

    fn horizon(&self) -> FunctionHorizon {
        FunctionHorizon::with_n_max(self.n_max)
    }
}

fn env_layer(env: &BTreeMap<String, String>) -> Result<Layer> {
    fn get<T: std::str::FromStr>(env: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
        env.get(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::Parse(format!("cannot parse {key}={v}")))
            })
            .transpose()
    }
    let format = match env.get("CFDIM_FORMAT") {
        Some(v) => Some(
            Format::from_str(v.trim(), true).map_err(|_| Error::Parse(format!("cannot parse CFDIM_FORMAT={v}")))?,
        ),
        None => None,
    };
    Ok(Layer {
        tol: get(env, "CFDIM_TOL")?,
        enumeration_cap: get(env, "CFDIM_ENUMERATION_CAP")?,
        grid: get(env, "CFDIM_GRID")?,
        k_max: get(env, "CFDIM_K_MAX")?,
        n_max: get(env, "CFDIM_N_MAX")?,
        format,
        seed: get(env, "CFDIM_SEED")?,
        threads: get(env, "CFDIM_THREADS")?,
    })
}

#[derive(Debug, Parser)]
#[command(name = "cfdim", version, about = "Pressure functions and Hausdorff dimensions of continued-fraction sets")]
struct Cli {
    /// TOML file with run settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest word count enumerated before switching to the operator method.
    #[arg(long = "enumeration-cap", global = true)]
    enumeration_cap: Option<u64>,
    /// Operator grid size.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long = "k-max", global = true)]
    k_max: Option<usize>,
    #[arg(long = "n-max", global = true)]
    n_max: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write plot data (series,x,y) to this path.
    #[arg(long = "emit-plot", global = true)]
    emit_plot: Option<PathBuf>,
    /// Record wall-clock runtime in the report (makes reruns differ).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bracket P(θ) or P_M(θ).
    Pressure(PressureArgs),
    /// Solve P(θ) = rhs(θ) for an affine or hat right-hand side.
    Solve(SolveArgs),
    /// Dimension of a set family.
    Dim {
        #[command(subcommand)]
        family: DimCmd,
    },
    /// Growth diagnostics and hypothesis checks.
    Profile {
        #[command(subcommand)]
        what: ProfileCmd,
    },
    /// Brute-force checks and empirical estimators.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
}

#[derive(Debug, Args)]
struct PressureArgs {
    #[arg(long)]
    theta: f64,
    /// Digit cap M, or "unbounded".
    #[arg(long, default_value = "unbounded")]
    cap: String,
    #[arg(long)]
    depth: Option<usize>,
    /// Bracket P_M instead of P.
    #[arg(long)]
    restricted: bool,
    /// Refine the full pressure to the run tolerance.
    #[arg(long)]
    refine: bool,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long = "curve-from", default_value_t = 0.55)]
    curve_from: f64,
    #[arg(long = "curve-to", default_value_t = 1.5)]
    curve_to: f64,
    #[arg(long = "curve-points", default_value_t = 20)]
    curve_points: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Enumerate,
    Operator,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Enumerate => Method::Enumerate,
            MethodArg::Operator => Method::OperatorIteration,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// "full" or a digit cap M.
    #[arg(long, default_value = "full")]
    source: String,
    #[arg(long, allow_hyphen_values = true)]
    slope: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    intercept: Option<f64>,
    /// Use the hat right-hand side with this log C.
    #[arg(long = "hat-log-c")]
    hat_log_c: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
struct ParamArgs {
    /// Named constant, NAME=VALUE (repeatable).
    #[arg(long = "param")]
    param: Vec<String>,
    /// Shorthand for --param B=VALUE; must exceed 1.
    #[arg(long = "B")]
    big_b: Option<f64>,
    /// Shorthand for --param C=VALUE; must exceed 1.
    #[arg(long = "C")]
    big_c: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for p in &self.param {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("--param expects NAME=VALUE, got {p}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value in --param {p}")))?;
            out.insert(k.trim().to_string(), v);
        }
        for (name, v) in [("B", self.big_b), ("C", self.big_c)] {
            if let Some(v) = v {
                out.insert(name.to_string(), v);
            }
        }
        for name in ["B", "C"] {
            if let Some(&v) = out.get(name) {
                if !(v > 1.0) || !v.is_finite() {
                    return Err(Error::domain(format!(
                        "{name} > 1 required (got {v}); {name} = 1 makes the growth trivial"
                    )));
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Args)]
struct SeqArgs {
    /// Positions n_k as an expression in k.
    #[arg(long = "n")]
    n: String,
    /// s_k (may use n_k).
    #[arg(long)]
    s: String,
    /// t_k; defaults to s_k.
    #[arg(long)]
    t: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    xi: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Skip the (H1)-(H3) checks.
    #[arg(long = "assume-hypotheses")]
    assume_hypotheses: bool,
}

fn parse_ext(s: &str) -> Result<ExtReal> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(ExtReal::Infinite),
        "0" | "zero" => Ok(ExtReal::Zero),
        v => {
            let x: f64 = v.parse().map_err(|_| Error::Parse(format!("bad extended real {s}")))?;
            match ExtReal::from_f64(x) {
                ExtReal::Unknown => Err(Error::domain(format!("{s} is not in [0, inf]"))),
                e => Ok(e),
            }
        }
    }
}

impl SeqArgs {
    fn triple(&self) -> Result<SequenceTriple> {
        let p = self.params.resolve()?;
        let n = Generator::parse(&self.n, &p)?;
        let s = Generator::parse(&self.s, &p)?;
        let t = match &self.t {
            Some(t) => Generator::parse(t, &p)?,
            None => s.clone(),
        };
        let ov = |o: &Option<String>| o.as_deref().map(parse_ext).transpose();
        Ok(SequenceTriple::new(n, s, t).with_overrides(Overrides {
            alpha: ov(&self.alpha)?,
            beta: ov(&self.beta)?,
            xi: ov(&self.xi)?,
            gamma: ov(&self.gamma)?,
            assume_hypotheses: self.assume_hypotheses,
        }))
    }

    fn query(&self) -> Value {
        json!({"n": self.n, "s": self.s, "t": self.t, "params": self.params.param, "B": self.params.big_b,
               "C": self.params.big_c, "alpha": self.alpha, "beta": self.beta, "xi": self.xi,
               "gamma": self.gamma, "assume_hypotheses": self.assume_hypotheses})
    }
}

#[derive(Debug, Args)]
struct FnArgs {
    /// ψ(n) or φ(n) as an expression in n.
    #[arg(long)]
    psi: String,
    #[command(flatten)]
    params: ParamArgs,
}

impl FnArgs {
    fn generator(&self) -> Result<Generator> {
        Generator::parse(&self.psi, &self.params.resolve()?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    A,
    M,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SumKind {
    ExpPower,
    SqrtR1,
    SqrtR2,
    FloorPower,
    FloorExp,
    Raw,
}

#[derive(Debug, Subcommand)]
enum DimCmd {
    /// Points with a digit in (s_k, s_k+t_k] at each n_k.
    E(SeqArgs),
    /// The same with a lower bound only at n_k.
    El(SeqArgs),
    /// Bounded digits F_N.
    Fn {
        #[arg(long = "N")]
        n: u64,
    },
    /// limsup families A(ψ) and M(ψ).
    Limsup {
        #[command(flatten)]
        f: FnArgs,
        #[arg(long, value_enum, default_value = "a")]
        family: FamilyArg,
    },
    /// liminf of the running maximum.
    LiminfMax(FnArgs),
    /// Sum sets S(φ).
    Sum {
        #[arg(long, value_enum, default_value = "raw")]
        family: SumKind,
        /// φ(n) for the raw family.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        r1: Option<String>,
        #[arg(long)]
        r2: Option<String>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Lower-bound exponent from sequences u_n, v_n.
    LiaoRams {
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long, default_value_t = 50)]
        depth: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ProfileCmd {
    /// α, β, ξ, γ and (H1)-(H3) for a triple.
    Sequence(SeqArgs),
    /// B, b, C, c, the limit flag and the sum-set conditions for a function.
    Function {
        #[command(flatten)]
        f: FnArgs,
        /// Also run the sum-set classifier.
        #[arg(long)]
        sum: bool,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Dyadic band counts of depth-k cylinders.
    Bands {
        #[arg(long)]
        k: usize,
        #[arg(long = "m-max", default_value_t = 24)]
        m_max: u32,
        #[arg(long, default_value = "unbounded")]
        cap: String,
        #[arg(long = "node-cap", default_value_t = 200_000_000)]
        node_cap: u64,
    },
    /// Band-count lemma at depth k.
    LemmaNp {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        k: usize,
        /// Check the restricted form with digit cap M.
        #[arg(long)]
        restricted: Option<u64>,
        #[arg(long = "m-limit", default_value_t = 24)]
        m_limit: u32,
    },
    /// Cover levels with Falconer and covering estimates.
    Cover {
        /// Cover F_M instead of a triple.
        #[arg(long = "M")]
        m: Option<u64>,
        #[arg(long, default_value_t = 14)]
        depth: usize,
        /// Stopping-time levels for F_M.
        #[arg(long)]
        stopping: bool,
        #[arg(long = "n")]
        n: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long = "digit-bound", default_value_t = 1)]
        digit_bound: u64,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, value_enum, default_value = "natural")]
        scheme: SchemeArg,
        #[arg(long)]
        k0: Option<usize>,
        #[arg(long)]
        m0: Option<u32>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Wang–Wu s_n(B) bracket.
    WangWu {
        #[arg(long = "B")]
        b: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 24)]
        truncation: u64,
    },
    /// Box-counting slope of sampled points.
    Boxcount {
        #[arg(long)]
        cap: Option<u64>,
        /// Comma-separated digit set.
        #[arg(long)]
        digits: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long = "scale-from", default_value_t = 4)]
        scale_from: u32,
        #[arg(long = "scale-to", default_value_t = 14)]
        scale_to: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Natural,
    Block,
}

/// Published report schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub query: Value,
    pub branch: String,
    pub value_lo: f64,
    pub value_hi: f64,
    pub diagnostics: Map<String, Value>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(rename = "M")]
    pub m: Value,
    pub n: Value,
    pub tol: f64,
    /// Seconds; present only with `--timing`.
    pub runtime: Option<f64>,
}

/// Parses a JSON report.
pub fn parse_report(s: &str) -> Result<Report> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget(_) => 3,
        Error::Parse(_) => 64,
        _ => 2,
    }
}

/// Runs `argv` (including the program name) with settings from the process environment.
pub fn execute<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env: BTreeMap<String, String> = std::env::vars().filter(|(k, _)| k.starts_with("CFDIM_")).collect();
    execute_with_env(argv, &env)
}

/// [`execute`] with an explicit `CFDIM_*` environment.
pub fn execute_with_env<I, T>(argv: I, env: &BTreeMap<String, String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match run(&cli, env) {
        Ok(out) => Outcome {
            code: 0,
            stdout: out,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("cfdim: {e}\n"),
        },
    }
}

fn resolve_config(cli: &Cli, env: &BTreeMap<String, String>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let path = cli.config.clone().or_else(|| env.get("CFDIM_CONFIG").map(PathBuf::from));
    if let Some(p) = path {
        let text = std::fs::read_to_string(&p)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", p.display())))?;
        let layer: Layer = toml::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", p.display())))?;
        cfg.apply(&layer);
    }
    cfg.apply(&env_layer(env)?);
    cfg.apply(&Layer {
        tol: cli.tol,
        enumeration_cap: cli.enumeration_cap,
        grid: cli.grid,
        k_max: cli.k_max,
        n_max: cli.n_max,
        format: cli.format,
        seed: cli.seed,
        threads: cli.threads,
    });
    cfg.validate()?;
    Ok(cfg)
}

/// Result of a command before formatting.
struct Body {
    query: Value,
    branch: String,
    lo: f64,
    hi: f64,
    diagnostics: Map<String, Value>,
    m: Value,
    n: Value,
    plot: Vec<(String, f64, f64)>,
}

impl Body {
    fn new(query: Value, branch: impl Into<String>, lo: f64, hi: f64) -> Self {
        Body {
            query,
            branch: branch.into(),
            lo,
            hi,
            diagnostics: Map::new(),
            m: Value::Null,
            n: Value::Null,
            plot: Vec::new(),
        }
    }

    fn diag(mut self, k: &str, v: Value) -> Self {
        self.diagnostics.insert(k.to_string(), v);
        self
    }

    fn from_dimension(query: Value, r: DimensionResult) -> Self {
        let mut b = Body::new(query, r.branch.clone(), r.value_lo, r.value_hi);
        b.diagnostics.insert("marker".into(), json!(r.marker));
        for (k, v) in r.diagnostics {
            b.diagnostics.insert(k, v);
        }
        b
    }
}

fn run(cli: &Cli, env: &BTreeMap<String, String>) -> Result<String> {
    let cfg = resolve_config(cli, env)?;
    let start = Instant::now();
    let body = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(|| dispatch(&cli.cmd, &cfg))?,
        None => dispatch(&cli.cmd, &cfg)?,
    };
    let runtime = cli.timing.then(|| start.elapsed().as_secs_f64());
    if let Some(path) = &cli.emit_plot {
        let mut text = String::from("series,x,y\n");
        for (s, x, y) in &body.plot {
            text.push_str(&format!("{},{x},{y}\n", csv_field(s)));
        }
        std::fs::write(path, text).map_err(|e| Error::domain(format!("cannot write {}: {e}", path.display())))?;
    }
    let report = Report {
        query: body.query,
        branch: body.branch,
        value_lo: finite_or_bound(body.lo),
        value_hi: finite_or_bound(body.hi),
        diagnostics: body.diagnostics,
        provenance: Provenance {
            m: body.m,
            n: body.n,
            tol: cfg.tol,
            runtime,
        },
    };
    Ok(render(&report, cfg.format))
}

fn finite_or_bound(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else if x > 0.0 {
        f64::MAX
    } else {
        f64::MIN
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("serialisable") + "\n",
        Format::Csv => format!(
            "query,branch,value_lo,value_hi\n{},{},{},{}\n",
            csv_field(&r.query.to_string()),
            csv_field(&r.branch),
            r.value_lo,
            r.value_hi
        ),
        Format::Table => {
            let mut out = format!(
                "{:<14} {}\n{:<14} [{}, {}]\n",
                "branch", r.branch, "value", r.value_lo, r.value_hi
            );
            for (k, v) in &r.diagnostics {
                out.push_str(&format!("{k:<14} {v}\n"));
            }
            out.push_str(&format!(
                "{:<14} M={} n={} tol={}\n",
                "provenance", r.provenance.m, r.provenance.n, r.provenance.tol
            ));
            out
        }
    }
}

fn parse_cap(s: &str) -> Result<DigitCap> {
    match s.trim().to_ascii_lowercase().as_str() {
        "unbounded" | "inf" | "full" => Ok(DigitCap::Unbounded),
        v => match v.parse::<u64>() {
            Ok(0) | Err(_) => Err(Error::Parse(format!("cap must be a positive integer or 'unbounded', got {s}"))),
            Ok(m) => Ok(DigitCap::Bounded(m)),
        },
    }
}

fn bracket_diag(b: &PressureBracket) -> Value {
    json!({"lower": b.lower, "upper": b.upper, "width": b.width(), "depth": b.depth,
           "method": format!("{:?}", b.method), "kind": format!("{:?}", b.kind), "converged": b.converged})
}

fn cap_value(c: DigitCap) -> Value {
    match c {
        DigitCap::Bounded(m) => json!(m),
        DigitCap::Unbounded => json!("unbounded"),
    }
}

fn pressure_cmd(a: &PressureArgs, cfg: &RunConfig) -> Result<Body> {
    let pc = cfg.pressure_config();
    let cap = parse_cap(&a.cap)?;
    let method: Method = a.method.into();
    let depth = a.depth.unwrap_or(12);
    let eval = |theta: f64| -> Result<PressureBracket> {
        match (cap, a.refine, a.restricted) {
            (_, true, _) => pressure_refine(theta, cfg.tol, &RefineBudget { config: pc, ..RefineBudget::default() }),
            (DigitCap::Unbounded, false, _) => match a.depth {
                Some(n) => DepthSweep::new(theta, DigitCap::Unbounded, &pc)?.bracket(n),
                None => pressure_refine(theta, cfg.tol, &RefineBudget { config: pc, ..RefineBudget::default() }),
            },
            (DigitCap::Bounded(_), false, true) => pressure_restricted(
                &PressureQuery {
                    theta,
                    cap,
                    depth,
                    method,
                },
                &pc,
            ),
            (DigitCap::Bounded(m), false, false) => pressure_full(theta, m, depth, method, &pc),
        }
    };
    let b = eval(a.theta)?;
    let label = if a.restricted { "restricted pressure bracket" } else { "pressure bracket" };
    let query = json!({"command": "pressure", "theta": a.theta, "cap": a.cap, "depth": a.depth,
                       "restricted": a.restricted, "refine": a.refine});
    let mut body = Body::new(query, label, b.lower, b.upper).diag("bracket", bracket_diag(&b));
    body.m = cap_value(cap);
    body.n = json!(b.depth);
    if a.curve_points >= 2 {
        for i in 0..a.curve_points {
            let th = a.curve_from + (a.curve_to - a.curve_from) * i as f64 / (a.curve_points - 1) as f64;
            if let Ok(c) = eval(th) {
                body.plot.push(("P_lower".into(), th, c.lower));
                body.plot.push(("P_upper".into(), th, c.upper));
            }
        }
    }
    Ok(body)
}

fn solve_cmd(a: &SolveArgs, cfg: &RunConfig) -> Result<Body> {
    let source = match parse_cap(&a.source)? {
        DigitCap::Unbounded => PressureSource::Full,
        DigitCap::Bounded(m) => PressureSource::Restricted(m),
    };
    let rhs = match (a.hat_log_c, a.slope, a.intercept) {
        (Some(l), None, None) => Rhs::Hat { log_c: l },
        (None, Some(s), Some(i)) => Rhs::Affine { slope: s, intercept: i },
        _ => {
            return Err(Error::Parse(
                "give either --slope and --intercept, or --hat-log-c".into(),
            ))
        }
    };
    let r = solve_pressure_equation(&PressureEquation { rhs, source }, &cfg.solve_options())?;
    let query = json!({"command": "solve", "source": a.source, "slope": a.slope, "intercept": a.intercept,
                       "hat_log_c": a.hat_log_c});
    let mut b = Body::from_dimension(query, r);
    b.m = match source {
        PressureSource::Full => json!("unbounded"),
        PressureSource::Restricted(m) => json!(m),
    };
    b.n = b.diagnostics.get("depth").cloned().unwrap_or(Value::Null);
    Ok(b)
}

fn dim_cmd(d: &DimCmd, cfg: &RunConfig) -> Result<Body> {
    let opts = cfg.solve_options();
    match d {
        DimCmd::E(s) | DimCmd::El(s) => {
            let el = matches!(d, DimCmd::El(_));
            let p = growth_profile(&s.triple()?, cfg.k_max)?;
            let r = if el { dim_EL(&p, &opts)? } else { dim_E(&p, &opts)? };
            let mut q = s.query();
            q["command"] = json!(if el { "dim el" } else { "dim e" });
            let mut b = Body::from_dimension(q, r).diag("hypotheses", json!(p.hypotheses)).diag("notes", json!(p.notes));
            b.n = json!(cfg.k_max);
            for (name, tr) in [("ln_alpha", &p.traces.ln_alpha), ("ln_beta", &p.traces.ln_beta)] {
                for (x, y) in p.traces.ln_n.iter().zip(tr) {
                    b.plot.push((name.into(), *x, *y));
                }
            }
            Ok(b)
        }
        DimCmd::Fn { n } => {
            let r = dim_F_N(*n, &opts)?;
            let mut b = Body::from_dimension(json!({"command": "dim fn", "N": n}), r);
            b.m = json!(n);
            b.n = b.diagnostics.get("depth").cloned().unwrap_or(Value::Null);
            Ok(b)
        }
        DimCmd::Limsup { f, family } => {
            let fp = profile_function(&f.generator()?, &cfg.horizon())?;
            let fam = match family {
                FamilyArg::A => LimsupFamily::A,
                FamilyArg::M => LimsupFamily::M,
            };
            let r = dim_limsup_family(&fp, fam, &opts)?;
            let q = json!({"command": "dim limsup", "psi": f.psi, "family": format!("{fam:?}"),
                           "params": f.params.param, "B": f.params.big_b});
            let mut b = Body::from_dimension(q, r);
            b.n = json!(cfg.n_max);
            Ok(b)
        }
        DimCmd::LiminfMax(f) => {
            let fp = profile_function(&f.generator()?, &cfg.horizon())?;
            let r = dim_liminf_max(&fp, &opts)?;
            let q = json!({"command": "dim liminf-max", "psi": f.psi, "params": f.params.param, "C": f.params.big_c});
            let mut b = Body::from_dimension(q, r);
            b.n = json!(cfg.n_max);
            Ok(b)
        }
        DimCmd::Sum { family, phi, r, c, d, gamma, r1, r2, params } => {
            let p = params.resolve()?;
            let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Parse(format!("--{name} is required")));
            let gen = |v: &Option<String>, name: &str| -> Result<Generator> {
                Generator::parse(
                    v.as_deref().ok_or_else(|| Error::Parse(format!("--{name} is required")))?,
                    &p,
                )
            };
            let fam = match family {
                SumKind::ExpPower => SumFamily::ExpPower { r: need(*r, "r")? },
                SumKind::SqrtR1 => SumFamily::SqrtPlusR1 { c: need(*c, "c")?, r1: gen(r1, "r1")? },
                SumKind::SqrtR2 => SumFamily::SqrtPlusR2 { c: need(*c, "c")?, r2: gen(r2, "r2")? },
                SumKind::FloorPower => SumFamily::FloorPower {
                    c: need(*c, "c")?,
                    d: need(*d, "d")?,
                    r: need(*r, "r")?,
                },
                SumKind::FloorExp => SumFamily::FloorExp {
                    c: need(*c, "c")?,
                    gamma: need(*gamma, "gamma")?,
                },
                SumKind::Raw => SumFamily::Raw(gen(phi, "phi")?),
            };
            let res = dim_sum_family(&fam, &cfg.horizon(), &opts)?;
            let q = json!({"command": "dim sum", "family": fam.describe()});
            let mut b = Body::from_dimension(q, res);
            b.n = json!(cfg.n_max);
            Ok(b)
        }
        DimCmd::LiaoRams { u, v, depth, params } => {
            let p = params.resolve()?;
            let (gu, gv) = (Generator::parse(u, &p)?, Generator::parse(v, &p)?);
            let r = dim_liao_rams(&gu, &gv, *depth)?;
            let t = liao_rams_trace(&gu, &gv, *depth)?;
            let q = json!({"command": "dim liao-rams", "u": u, "v": v, "depth": depth});
            let mut b = Body::from_dimension(q, r);
            b.n = json!(depth);
            for (i, y) in t.ratio.iter().enumerate() {
                b.plot.push(("ratio".into(), (i + 1) as f64, *y));
            }
            Ok(b)
        }
    }
}

fn profile_cmd(p: &ProfileCmd, cfg: &RunConfig) -> Result<Body> {
    match p {
        ProfileCmd::Sequence(s) => {
            let g = growth_profile(&s.triple()?, cfg.k_max)?;
            let mut q = s.query();
            q["command"] = json!("profile sequence");
            let unmet = g.hypotheses.unmet();
            let branch = if unmet.is_empty() { "hypotheses hold" } else { "hypotheses unmet" };
            let mut b = Body::new(q, branch, f64::NAN, f64::NAN)
                .diag("alpha", json!(g.alpha))
                .diag("beta", json!(g.beta))
                .diag("xi", json!(g.xi))
                .diag("gamma", json!(g.gamma))
                .diag("hypotheses", json!(g.hypotheses))
                .diag("unmet", json!(unmet))
                .diag("notes", json!(g.notes));
            b.lo = 0.0;
            b.hi = 1.0;
            b.n = json!(cfg.k_max);
            for (name, tr) in [
                ("ln_alpha", &g.traces.ln_alpha),
                ("ln_beta", &g.traces.ln_beta),
                ("ln_xi", &g.traces.ln_xi),
                ("ln_ln_gamma", &g.traces.ln_ln_gamma),
            ] {
                for (x, y) in g.traces.ln_n.iter().zip(tr) {
                    b.plot.push((name.into(), *x, *y));
                }
            }
            Ok(b)
        }
        ProfileCmd::Function { f, sum } => {
            let g = f.generator()?;
            let h = cfg.horizon();
            let fp = function_profile(&g, &h)?;
            let q = json!({"command": "profile function", "psi": f.psi, "params": f.params.param});
            let mut b = Body::new(q, "function profile", 0.0, 1.0)
                .diag("B_psi", json!(fp.b_big))
                .diag("b_psi", json!(fp.b_small))
                .diag("C_psi", json!(fp.c_big))
                .diag("c_psi", json!(fp.c_small))
                .diag("limit_flag", json!(fp.limit_flag))
                .diag("sqrt_scale_limsup", json!(fp.sqrt_scale_limsup))
                .diag("linear_scale_limsup", json!(fp.linear_scale_limsup))
                .diag("increasing", json!(fp.increasing))
                .diag("condition_ed", json!(fp.condition_ed))
                .diag("condition_maxine", json!(fp.condition_maxine));
            if *sum {
                let c = classify_sum_function(&g, &h)?;
                b.branch = c.branch.to_string();
                b = b.diag("sum_notes", json!(c.notes));
            }
            b.n = json!(cfg.n_max);
            Ok(b)
        }
    }
}

fn levels_json(levels: &[CoverLevel]) -> Value {
    json!(levels)
}

fn verify_cmd(v: &VerifyCmd, cfg: &RunConfig) -> Result<Body> {
    match v {
        VerifyCmd::Bands { k, m_max, cap, node_cap } => {
            let c = parse_cap(cap)?;
            let t = band_counts(*k, *m_max, c, *node_cap)?;
            let total = t.total() as f64;
            let q = json!({"command": "verify bands", "k": k, "m_max": m_max, "cap": cap});
            let mut b = Body::new(q, "band counts", total, total)
                .diag("table", json!(t.table))
                .diag("nodes", json!(t.nodes));
            b.m = cap_value(c);
            b.n = json!(k);
            Ok(b)
        }
        VerifyCmd::LemmaNp { theta, eps, k, restricted, m_limit } => {
            let mode = match restricted {
                Some(m) => LemmaMode::Restricted(*m),
                None => LemmaMode::Full,
            };
            let o = LemmaOptions {
                m_limit: *m_limit,
                pressure_tol: cfg.tol.max(0.02),
                ..LemmaOptions::default()
            };
            let r = verify_lemma_np(*theta, *eps, *k, mode, &o)?;
            let found = r.found_m.map(|m| m as f64).unwrap_or(f64::NAN);
            let q = json!({"command": "verify lemma-np", "theta": theta, "eps": eps, "k": k, "restricted": restricted});
            let branch = if r.found_m.is_some() { "band found" } else { "no band at this depth" };
            let mut b = Body::new(q, branch, found, found).diag("report", json!(r));
            if r.found_m.is_none() {
                b.lo = 0.0;
                b.hi = 0.0;
            }
            b.m = restricted.map(|m| json!(m)).unwrap_or(json!("unbounded"));
            b.n = json!(k);
            Ok(b)
        }
        VerifyCmd::Cover { m, depth, stopping, n, s, t, digit_bound, levels, scheme, k0, m0, params } => {
            let (lv, q, mv, nv) = match (m, n) {
                (Some(m), None) => {
                    let lv = if *stopping { fm_stopping_cover(*m, *depth)? } else { fm_cover(*m, *depth)? };
                    (lv, json!({"command": "verify cover", "M": m, "depth": depth, "stopping": stopping}), json!(m), json!(depth))
                }
                (None, Some(n)) => {
                    let p = params.resolve()?;
                    let sg = Generator::parse(s.as_deref().ok_or_else(|| Error::Parse("--s is required".into()))?, &p)?;
                    let tg = match t {
                        Some(t) => Generator::parse(t, &p)?,
                        None => sg.clone(),
                    };
                    let tr = SequenceTriple::new(Generator::parse(n, &p)?, sg, tg);
                    let sch = match scheme {
                        SchemeArg::Natural => CoverScheme::Natural,
                        SchemeArg::Block => CoverScheme::Block {
                            k0: k0.ok_or_else(|| Error::Parse("--k0 is required".into()))?,
                            m0: m0.ok_or_else(|| Error::Parse("--m0 is required".into()))?,
                        },
                    };
                    let lv = build_cover(&tr, *digit_bound, *levels, sch)?;
                    (
                        lv,
                        json!({"command": "verify cover", "n": n, "s": s, "t": t, "digit_bound": digit_bound,
                               "levels": levels, "scheme": format!("{sch:?}")}),
                        json!(digit_bound),
                        json!(levels),
                    )
                }
                _ => return Err(Error::Parse("give either --M or --n/--s".into())),
            };
            let cov = covering_estimate(&lv)?;
            let fal = falconer_estimate(&lv);
            let (lo, hi) = match &fal {
                Ok(f) => (f.final_value.min(cov.final_value), cov.final_value),
                Err(_) => (0.0, cov.final_value),
            };
            let mut b = Body::new(q, "cover estimates", lo, hi)
                .diag("covering", json!(cov))
                .diag("levels", levels_json(&lv));
            b = match &fal {
                Ok(f) => b.diag("falconer", json!(f)),
                Err(e) => b.diag("falconer_error", json!(e.to_string())),
            };
            for (l, y) in &cov.values {
                b.plot.push(("covering".into(), *l as f64, *y));
            }
            if let Ok(f) = &fal {
                for (l, y) in &f.values {
                    b.plot.push(("falconer".into(), *l as f64, *y));
                }
            }
            b.m = mv;
            b.n = nv;
            Ok(b)
        }
        VerifyCmd::WangWu { b: big_b, n, truncation } => {
            let r = wang_wu_s_n(
                *big_b,
                *n,
                &WangWuOptions {
                    truncation: *truncation,
                    ..WangWuOptions::default()
                },
            )?;
            let q = json!({"command": "verify wang-wu", "B": big_b, "n": n, "truncation": truncation});
            let mut b = Body::new(q, "wang-wu s_n bracket", r.lo, r.hi).diag("tail_ratio", json!(r.tail_ratio));
            b.m = json!(truncation);
            b.n = json!(n);
            Ok(b)
        }
        VerifyCmd::Boxcount { cap, digits, count, depth, scale_from, scale_to } => {
            let src = match (cap, digits) {
                (Some(m), None) => DigitSource::Cap(*m),
                (None, Some(d)) => DigitSource::Set(
                    d.split(',')
                        .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad digit list {d}"))))
                        .collect::<Result<_>>()?,
                ),
                _ => return Err(Error::Parse("give either --cap or --digits".into())),
            };
            let r = boxcount_sample(&src, *count, *depth, &dyadic_scales(*scale_from, *scale_to), cfg.seed)?;
            let q = json!({"command": "verify boxcount", "cap": cap, "digits": digits, "count": count,
                           "depth": depth, "scale_from": scale_from, "scale_to": scale_to, "seed": cfg.seed});
            let mut b = Body::new(q, "box-counting slope", r.slope, r.slope).diag("counts", json!(r.counts));
            for (d, c) in &r.counts {
                b.plot.push(("ln_count".into(), -d.ln(), (*c as f64).ln()));
            }
            b.m = cap.map(|m| json!(m)).unwrap_or(Value::Null);
            b.n = json!(depth);
            Ok(b)
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Body> {
    match cmd {
        Command::Pressure(a) => pressure_cmd(a, cfg),
        Command::Solve(a) => solve_cmd(a, cfg),
        Command::Dim { family } => dim_cmd(family, cfg),
        Command::Profile { what } => profile_cmd(what, cfg),
        Command::Verify { what } => verify_cmd(what, cfg),
    }
}
