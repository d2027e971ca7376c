//! Two-sided brackets for the restricted pressure `P_M(θ)` and the full pressure `P(θ)`.
//!
//! With `S_n = Σ q_n^{-2θ}`, the inequalities `q_n q_k <= q_{n+k} <= 2 q_n q_k` make
//! `log S_n` subadditive and `log S_n - 2θ log 2` superadditive, so
//! `P ∈ [(log S_n - 2θ log 2)/n, (log S_n)/n]` for every depth `n`.

mod operator;

pub use operator::{Interp, OperatorGrid, OperatorIterate, TransferOperator};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::special::{power_tail_upper, LogSum};

/// Digit alphabet `{1..M}` or all positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DigitCap {
    Bounded(u64),
    Unbounded,
}

impl std::fmt::Display for DigitCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DigitCap::Bounded(m) => write!(f, "{m}"),
            DigitCap::Unbounded => write!(f, "unbounded"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Enumerate,
    OperatorIteration,
    /// Enumerate when the word count fits the cap, otherwise iterate the operator.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BracketKind {
    Restricted,
    Full,
}

/// Library-wide numerical settings for pressure evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureConfig {
    pub enumeration_cap: u64,
    pub grid: OperatorGrid,
    /// Smallest θ accepted for the unbounded alphabet.
    pub singularity_guard: f64,
}

impl Default for PressureConfig {
    fn default() -> Self {
        Self {
            enumeration_cap: 50_000_000,
            grid: OperatorGrid::default(),
            singularity_guard: 0.505,
        }
    }
}

/// One pressure evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureQuery {
    pub theta: f64,
    pub cap: DigitCap,
    pub depth: usize,
    pub method: Method,
}

/// Certified enclosure of `P_M(θ)` or `P(θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureBracket {
    pub lower: f64,
    pub upper: f64,
    pub kind: BracketKind,
    pub theta: f64,
    pub cap: DigitCap,
    pub depth: usize,
    pub method: Method,
    pub converged: bool,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn overlaps(&self, other: &PressureBracket) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

fn check_query(q: &PressureQuery, cfg: &PressureConfig) -> Result<()> {
    if q.depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    if !(q.theta > 0.0) || !q.theta.is_finite() {
        return Err(Error::domain("theta must be positive and finite"));
    }
    match q.cap {
        DigitCap::Bounded(0) => Err(Error::domain("digit cap must be at least 1")),
        DigitCap::Unbounded if q.theta < cfg.singularity_guard => Err(Error::domain(format!(
            "unbounded alphabet needs theta >= {} (singularity at 1/2)",
            cfg.singularity_guard
        ))),
        _ => Ok(()),
    }
}

fn word_count(m: u64, n: usize) -> f64 {
    (m as f64).powi(n as i32)
}

fn resolve_method(q: &PressureQuery, cfg: &PressureConfig) -> Result<Method> {
    match (q.method, q.cap) {
        (Method::Enumerate, DigitCap::Unbounded) => Err(Error::domain(
            "enumeration needs a bounded digit cap",
        )),
        (Method::Enumerate, DigitCap::Bounded(m)) => {
            if word_count(m, q.depth) > cfg.enumeration_cap as f64 {
                Err(Error::Budget(format!(
                    "{m}^{} words exceed the enumeration cap {}",
                    q.depth, cfg.enumeration_cap
                )))
            } else {
                Ok(Method::Enumerate)
            }
        }
        (Method::Auto, DigitCap::Bounded(m))
            if word_count(m, q.depth) <= cfg.enumeration_cap as f64 =>
        {
            Ok(Method::Enumerate)
        }
        _ => Ok(Method::OperatorIteration),
    }
}

/// `log Σ_{a_i <= M} q_n^{-2θ}` by depth-first enumeration, split over the first digit.
fn enumerate_log_sum(theta: f64, m: u64, n: usize) -> f64 {
    let s = 2.0 * theta;
    let parts: Vec<LogSum> = (1..=m)
        .into_par_iter()
        .map(|a| {
            let mut acc = LogSum::new();
            // state: ln q_k and r = q_{k-1}/q_k
            let lnq = (a as f64).ln();
            let r = 1.0 / a as f64;
            if n == 1 {
                acc.add(-s * lnq);
                return acc;
            }
            let mut stack: Vec<(usize, f64, f64)> = vec![(1, lnq, r)];
            while let Some((k, lnq, r)) = stack.pop() {
                for b in 1..=m {
                    let ab = b as f64 + r;
                    let lnq2 = lnq + ab.ln();
                    if k + 1 == n {
                        acc.add(-s * lnq2);
                    } else {
                        stack.push((k + 1, lnq2, 1.0 / ab));
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = LogSum::new();
    for p in &parts {
        total.merge(p);
    }
    total.value()
}

/// `log S_n` with `S_n = Σ_{1 <= a_i <= M} q_n^{-2θ}`.
pub fn restricted_log_sum(q: &PressureQuery, cfg: &PressureConfig) -> Result<f64> {
    check_query(q, cfg)?;
    match resolve_method(q, cfg)? {
        Method::Enumerate => {
            let DigitCap::Bounded(m) = q.cap else {
                unreachable!("resolve_method rejects unbounded enumeration")
            };
            Ok(enumerate_log_sum(q.theta, m, q.depth))
        }
        _ => TransferOperator::new(q.theta, q.cap, &cfg.grid)?.log_sum(q.depth),
    }
}

fn sandwich(theta: f64, log_sum: f64, n: usize) -> (f64, f64) {
    let upper = log_sum / n as f64;
    (upper - 2.0 * theta * LN_2 / n as f64, upper)
}

/// `[(log S_n)/n - 2θ log 2 / n, (log S_n)/n]`.
pub fn pressure_restricted(q: &PressureQuery, cfg: &PressureConfig) -> Result<PressureBracket> {
    let ls = restricted_log_sum(q, cfg)?;
    let method = resolve_method(q, cfg)?;
    let (lower, upper) = sandwich(q.theta, ls, q.depth);
    Ok(PressureBracket {
        lower,
        upper,
        kind: if q.cap == DigitCap::Unbounded {
            BracketKind::Full
        } else {
            BracketKind::Restricted
        },
        theta: q.theta,
        cap: q.cap,
        depth: q.depth,
        method,
        converged: true,
    })
}

/// Upper bound on `δ_M(θ) = Σ_{j>M} (2/j)^{2θ}`.
pub fn tail_delta(theta: f64, m: u64) -> Result<f64> {
    if !(theta > 0.5) {
        return Err(Error::domain("tail series diverges for theta <= 1/2"));
    }
    if m == 0 {
        return Err(Error::domain("M must be at least 1"));
    }
    let s = 2.0 * theta;
    Ok(2f64.powf(s) * power_tail_upper(s, m))
}

/// Enclosure of `P(θ)` from the `M`-restricted bracket and the digit tail:
/// `P_M <= P <= log(e^{P_M} + δ_M)`.
pub fn pressure_full(
    theta: f64,
    m: u64,
    n: usize,
    method: Method,
    cfg: &PressureConfig,
) -> Result<PressureBracket> {
    if theta < cfg.singularity_guard {
        return Err(Error::domain(format!(
            "full pressure needs theta >= {}",
            cfg.singularity_guard
        )));
    }
    let q = PressureQuery {
        theta,
        cap: DigitCap::Bounded(m),
        depth: n,
        method,
    };
    let r = pressure_restricted(&q, cfg)?;
    let delta = tail_delta(theta, m)?;
    Ok(PressureBracket {
        lower: r.lower,
        upper: r.upper + (delta * (-r.upper).exp()).ln_1p(),
        kind: BracketKind::Full,
        ..r
    })
}

/// Depth sweep at a fixed θ: keeps the operator state so deeper brackets reuse earlier
/// iterations, and intersects the sandwich over every depth reached.
#[derive(Debug, Clone)]
pub struct DepthSweep {
    op: TransferOperator,
    it: OperatorIterate,
    cap: DigitCap,
}

impl DepthSweep {
    pub fn new(theta: f64, cap: DigitCap, cfg: &PressureConfig) -> Result<Self> {
        if cap == DigitCap::Unbounded && theta < cfg.singularity_guard {
            return Err(Error::domain(format!(
                "unbounded alphabet needs theta >= {}",
                cfg.singularity_guard
            )));
        }
        let op = TransferOperator::new(theta, cap, &cfg.grid)?;
        let it = op.start();
        Ok(Self { op, it, cap })
    }

    pub fn theta(&self) -> f64 {
        self.op.theta()
    }

    pub fn depth(&self) -> usize {
        self.it.depth()
    }

    /// Best bracket over all depths `<= n`.
    pub fn bracket(&mut self, n: usize) -> Result<PressureBracket> {
        self.op.advance(&mut self.it, n)?;
        let theta = self.theta();
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for (k, &ls) in self.it.log_sums().iter().enumerate() {
            let (lo, hi) = sandwich(theta, ls, k + 1);
            lower = lower.max(lo);
            upper = upper.min(hi);
        }
        Ok(PressureBracket {
            lower,
            upper,
            kind: if self.cap == DigitCap::Unbounded {
                BracketKind::Full
            } else {
                BracketKind::Restricted
            },
            theta,
            cap: self.cap,
            depth: self.depth(),
            method: Method::OperatorIteration,
            converged: true,
        })
    }
}

/// Limits for [`pressure_refine`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineBudget {
    pub max_depth: usize,
    pub config: PressureConfig,
}

impl Default for RefineBudget {
    fn default() -> Self {
        Self {
            max_depth: 8192,
            config: PressureConfig::default(),
        }
    }
}

/// Coarse first stage of [`pressure_refine`].
const COARSE_CAP: u64 = 10;
const COARSE_DEPTH: usize = 6;
const FIRST_SWEEP_DEPTH: usize = 32;

/// Narrows an enclosure of `P(θ)` until its width is at most `tol`.
///
/// Stage one is the tail bracket at `M = 10`, depth 6. Later stages iterate the
/// full-alphabet operator at doubling depths; every bracket obtained is intersected in.
/// If `max_depth` is reached first, the best bracket is returned with `converged = false`.
pub fn pressure_refine(theta: f64, tol: f64, budget: &RefineBudget) -> Result<PressureBracket> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol must be positive"));
    }
    let cfg = &budget.config;
    let mut best = pressure_full(theta, COARSE_CAP, COARSE_DEPTH, Method::Auto, cfg)?;
    best.converged = best.width() <= tol;
    if best.converged || tol.is_infinite() {
        return Ok(best);
    }
    let mut sweep = DepthSweep::new(theta, DigitCap::Unbounded, cfg)?;
    let mut n = FIRST_SWEEP_DEPTH.min(budget.max_depth.max(1));
    loop {
        let b = sweep.bracket(n)?;
        if b.lower > best.lower {
            best.lower = b.lower;
        }
        if b.upper < best.upper {
            best.upper = b.upper;
            best.cap = DigitCap::Unbounded;
            best.method = Method::OperatorIteration;
        }
        best.depth = b.depth;
        if best.width() <= tol {
            best.converged = true;
            return Ok(best);
        }
        if n >= budget.max_depth {
            best.converged = false;
            return Ok(best);
        }
        n = (n * 2).min(budget.max_depth);
    }
}
