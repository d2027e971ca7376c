//! Roots of pressure equations `P(θ) = rhs(θ)` and the dimension formulas built on them.
//!
//! Bisection only moves an endpoint when the pressure bracket at the midpoint lies
//! strictly above or strictly below the right-hand side; an undecided midpoint forces a
//! deeper bracket instead.

mod dispatch;

pub use dispatch::*;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pressure::{DepthSweep, DigitCap, PressureConfig};

/// Which pressure function the equation uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PressureSource {
    /// `P(θ)`, all digits, root searched in `(1/2, 1]`.
    Full,
    /// `P_M(θ)`, digits `<= M`, root searched in `[0, 1]`.
    Restricted(u64),
}

/// Right-hand side of a pressure equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rhs {
    /// `slope·θ + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `(√θ + √(2θ-1))² · log C`.
    Hat { log_c: f64 },
}

impl Rhs {
    pub fn eval(&self, theta: f64) -> f64 {
        match *self {
            Rhs::Affine { slope, intercept } => slope * theta + intercept,
            Rhs::Hat { log_c } => {
                let t = theta.sqrt() + (2.0 * theta - 1.0).max(0.0).sqrt();
                t * t * log_c
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureEquation {
    pub rhs: Rhs,
    pub source: PressureSource,
}

impl PressureEquation {
    pub fn full(rhs: Rhs) -> Self {
        Self {
            rhs,
            source: PressureSource::Full,
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub start_depth: usize,
    pub max_depth: usize,
    pub pressure: PressureConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            start_depth: 32,
            max_depth: 16384,
            pressure: PressureConfig::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// How a [`DimensionResult`] should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    /// `value_lo == value_hi` is the exact value.
    Exact,
    /// The true value lies in `[value_lo, value_hi]`.
    Enclosure,
    /// Only `value <= value_hi` is known.
    UpperBoundOnly,
    /// No applicable formula.
    Indeterminate,
}

/// A dimension value with the branch that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub value_lo: f64,
    pub value_hi: f64,
    pub branch: String,
    pub marker: Marker,
    pub diagnostics: BTreeMap<String, Value>,
}

impl DimensionResult {
    pub fn exact(v: f64, branch: impl Into<String>) -> Self {
        Self {
            value_lo: v,
            value_hi: v,
            branch: branch.into(),
            marker: Marker::Exact,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn enclosure(lo: f64, hi: f64, branch: impl Into<String>) -> Self {
        Self {
            value_lo: lo,
            value_hi: hi,
            branch: branch.into(),
            marker: Marker::Enclosure,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn upper_bound(hi: f64, branch: impl Into<String>) -> Self {
        Self {
            value_lo: 0.0,
            value_hi: hi,
            branch: branch.into(),
            marker: Marker::UpperBoundOnly,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn indeterminate(branch: impl Into<String>) -> Self {
        Self {
            value_lo: 0.0,
            value_hi: 1.0,
            branch: branch.into(),
            marker: Marker::Indeterminate,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.value_lo + self.value_hi)
    }

    pub fn width(&self) -> f64 {
        self.value_hi - self.value_lo
    }

    pub fn with(mut self, key: &str, v: Value) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    /// Relabels the branch, keeping the value and diagnostics.
    pub fn relabel(mut self, branch: impl Into<String>) -> Self {
        self.branch = branch.into();
        self
    }

    /// True when the two enclosures are disjoint with `self` below `other`.
    pub fn strictly_below(&self, other: &DimensionResult) -> bool {
        self.value_hi < other.value_lo
    }
}

enum Verdict {
    Above,
    Below,
    Undecided,
}

struct Bisector<'a> {
    eq: &'a PressureEquation,
    opts: &'a SolveOptions,
    depth: usize,
    evaluations: usize,
}

impl Bisector<'_> {
    fn cap(&self) -> DigitCap {
        match self.eq.source {
            PressureSource::Full => DigitCap::Unbounded,
            PressureSource::Restricted(m) => DigitCap::Bounded(m),
        }
    }

    /// Sign of `P(θ) - rhs(θ)`, deepening the bracket up to `max_depth`.
    fn classify(&mut self, theta: f64) -> Result<Verdict> {
        let mut sweep = DepthSweep::new(theta, self.cap(), &self.opts.pressure)?;
        let r = self.eq.rhs.eval(theta);
        loop {
            let b = sweep.bracket(self.depth)?;
            self.evaluations += 1;
            if b.lower > r {
                return Ok(Verdict::Above);
            }
            if b.upper < r {
                return Ok(Verdict::Below);
            }
            if self.depth >= self.opts.max_depth {
                return Ok(Verdict::Undecided);
            }
            self.depth = (self.depth * 2).min(self.opts.max_depth);
        }
    }
}

/// Encloses the unique crossing of `P` (or `P_M`) with the increasing `rhs`.
pub fn solve_pressure_equation(eq: &PressureEquation, opts: &SolveOptions) -> Result<DimensionResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tol must be positive"));
    }
    match eq.rhs {
        Rhs::Affine { slope, intercept } => {
            if !(slope >= 0.0) || !slope.is_finite() || !intercept.is_finite() {
                return Err(Error::domain("affine rhs needs a finite nonnegative slope"));
            }
        }
        Rhs::Hat { log_c } => {
            if !(log_c > 0.0) || !log_c.is_finite() {
                return Err(Error::domain("hat rhs needs log C > 0"));
            }
            if eq.source != PressureSource::Full {
                return Err(Error::domain("hat rhs is defined for the full pressure only"));
            }
        }
    }
    let mut bis = Bisector {
        eq,
        opts,
        depth: opts.start_depth.max(1),
        evaluations: 0,
    };
    let rhs_one = eq.rhs.eval(1.0);
    let (mut lo, mut hi) = match eq.source {
        PressureSource::Full => {
            // P(1) = 0 exactly and P → ∞ as θ ↓ 1/2
            if rhs_one < 0.0 {
                return Err(Error::NoCrossing(format!(
                    "rhs(1) = {rhs_one} < 0 = P(1): the root lies above 1"
                )));
            }
            if rhs_one == 0.0 {
                return Ok(DimensionResult::exact(1.0, "pressure equation").with(
                    "note",
                    json!("rhs(1) = 0 = P(1), root is exactly 1"),
                ));
            }
            (0.5, 1.0)
        }
        PressureSource::Restricted(m) => {
            if m == 0 {
                return Err(Error::domain("digit cap must be at least 1"));
            }
            // P_M(0) = log M exactly
            if (m as f64).ln() <= eq.rhs.eval(0.0) {
                return Err(Error::NoCrossing("P_M(0) does not exceed rhs(0)".into()));
            }
            match bis.classify(1.0)? {
                Verdict::Below => {}
                _ => {
                    return Err(Error::NoCrossing(
                        "P_M(1) not certified below rhs(1)".into(),
                    ))
                }
            }
            (0.0, 1.0)
        }
    };
    let guard = opts.pressure.singularity_guard;
    let mut notes: Vec<String> = Vec::new();
    let mut undecided_points = 0usize;
    while hi - lo > opts.tol {
        let mut mid = 0.5 * (lo + hi);
        if eq.source == PressureSource::Full && mid < guard {
            if hi <= guard {
                notes.push(format!(
                    "root below the singularity guard {guard}; enclosure not refined further"
                ));
                break;
            }
            mid = guard;
        }
        match bis.classify(mid)? {
            Verdict::Above => lo = mid,
            Verdict::Below => hi = mid,
            Verdict::Undecided => {
                undecided_points += 1;
                // shrink from both sides around the undecided zone
                let (a, b) = shrink_around(&mut bis, lo, mid, hi, opts.tol)?;
                lo = a;
                hi = b;
                if hi - lo > opts.tol {
                    return Err(Error::Budget(format!(
                        "depth {} cannot separate P from rhs: enclosure [{lo}, {hi}] wider than tol {}",
                        opts.max_depth, opts.tol
                    )));
                }
            }
        }
    }
    let mut res = DimensionResult::enclosure(lo, hi, "pressure equation")
        .with("depth", json!(bis.depth))
        .with("bracket_evaluations", json!(bis.evaluations))
        .with("tol", json!(opts.tol));
    if undecided_points > 0 {
        res = res.with("undecided_points", json!(undecided_points));
    }
    if !notes.is_empty() {
        res = res.with("notes", json!(notes));
    }
    Ok(res)
}

/// With `mid` undecided at full depth, move `lo` up and `hi` down as far as the
/// brackets allow.
fn shrink_around(bis: &mut Bisector<'_>, lo: f64, mid: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let step = tol / 8.0;
    let (mut a, mut b) = (lo, mid);
    while b - a > step {
        let m = 0.5 * (a + b);
        match bis.classify(m)? {
            Verdict::Above => a = m,
            _ => b = m,
        }
    }
    let new_lo = a;
    let (mut a, mut b) = (mid, hi);
    while b - a > step {
        let m = 0.5 * (a + b);
        match bis.classify(m)? {
            Verdict::Below => b = m,
            _ => a = m,
        }
    }
    Ok((new_lo, b))
}

fn affine(slope: f64, intercept: f64) -> PressureEquation {
    PressureEquation::full(Rhs::Affine { slope, intercept })
}

fn check_finite_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be finite and nonnegative")));
    }
    Ok(())
}

/// `θ(α, β)`: root of `P(θ) = (2α - β)θ - (α - β)`.
pub fn theta_alpha_beta(alpha: f64, beta: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    check_finite_nonneg("alpha", alpha)?;
    check_finite_nonneg("beta", beta)?;
    if !(alpha > 0.0) || beta > alpha {
        return Err(Error::domain("theta(alpha, beta) needs alpha >= beta >= 0 and alpha > 0"));
    }
    Ok(solve_pressure_equation(&affine(2.0 * alpha - beta, -(alpha - beta)), opts)?
        .relabel("theta(alpha, beta)")
        .with("alpha", json!(alpha))
        .with("beta", json!(beta)))
}

/// `θ(log B)`: root of `P(θ) = θ log B`.
pub fn theta_log_b(log_b: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    Ok(theta_alpha_beta(log_b, log_b, opts)?.relabel("theta(log B)"))
}

/// `Θ(b, c)`: root of `P(θ) = b(2θ - 1) + cθ`.
pub fn theta_big(b: f64, c: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    check_finite_nonneg("b", b)?;
    check_finite_nonneg("c", c)?;
    if b == 0.0 && c == 0.0 {
        return Ok(DimensionResult::exact(1.0, "Theta(b, c)").with("note", json!("P(1) = 0")));
    }
    Ok(solve_pressure_equation(&affine(2.0 * b + c, -b), opts)?
        .relabel("Theta(b, c)")
        .with("b", json!(b))
        .with("c", json!(c)))
}

/// `θ̂(log C)`: root of `P(θ) = (√θ + √(2θ-1))² log C`.
pub fn theta_hat(log_c: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    if !(log_c > 0.0) || !log_c.is_finite() {
        return Err(Error::domain("theta_hat needs 0 < log C < inf"));
    }
    Ok(
        solve_pressure_equation(&PressureEquation::full(Rhs::Hat { log_c }), opts)?
            .relabel("theta_hat(log C)")
            .with("log_c", json!(log_c)),
    )
}

/// Right-hand side `e^γ((e^γ+1)/(e^γ-1)·θ - 1/(e^γ-1))·log C` as an affine map.
pub fn type_three_rhs(gamma: f64, log_c: f64) -> Rhs {
    let u = gamma.exp();
    Rhs::Affine {
        slope: u * (u + 1.0) / (u - 1.0) * log_c,
        intercept: -u / (u - 1.0) * log_c,
    }
}

/// Root of the type III equation for a fixed `γ > 0`.
pub fn type_three_root(gamma: f64, log_c: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    if !(gamma > 0.0) || !(log_c > 0.0) {
        return Err(Error::domain("type III needs gamma > 0 and log C > 0"));
    }
    Ok(
        solve_pressure_equation(&PressureEquation::full(type_three_rhs(gamma, log_c)), opts)?
            .relabel("type III")
            .with("gamma", json!(gamma))
            .with("log_c", json!(log_c)),
    )
}

/// Minimiser in `γ` of the type III right-hand side at fixed `θ`.
pub fn optimal_gamma(theta: f64) -> f64 {
    (1.0 + ((2.0 * theta - 1.0) / theta).sqrt()).ln()
}

/// `η_d(c)`: root of `P(θ) = c d (1 - r)(2θ - 1)`.
pub fn eta_d(c: f64, d: f64, r: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    if !(c > 0.0 && d > 0.0) || !(0.5..1.0).contains(&r) {
        return Err(Error::domain("eta_d needs c, d > 0 and r in [1/2, 1)"));
    }
    let k = c * d * (1.0 - r);
    Ok(solve_pressure_equation(&affine(2.0 * k, -k), opts)?
        .relabel("eta_d(c)")
        .with("c", json!(c))
        .with("d", json!(d))
        .with("r", json!(r)))
}

/// `ξ_γ(c)`: root of `P(θ) = c((e^γ+1)/(e^γ-1)·θ - 1/(e^γ-1))`.
pub fn xi_gamma(c: f64, gamma: f64, opts: &SolveOptions) -> Result<DimensionResult> {
    if !(c > 0.0 && gamma > 0.0) {
        return Err(Error::domain("xi_gamma needs c, gamma > 0"));
    }
    let u = gamma.exp();
    Ok(
        solve_pressure_equation(&affine(c * (u + 1.0) / (u - 1.0), -c / (u - 1.0)), opts)?
            .relabel("xi_gamma(c)")
            .with("c", json!(c))
            .with("gamma", json!(gamma)),
    )
}

/// `θ_N = dim F_N`, the zero of `P_N` in `[0, 1]`.
#[allow(non_snake_case)]
pub fn dim_F_N(n: u64, opts: &SolveOptions) -> Result<DimensionResult> {
    if n == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if n == 1 {
        // P_1(θ) = -2θ log φ
        return Ok(DimensionResult::exact(0.0, "dim F_N").with("N", json!(1)));
    }
    let eq = PressureEquation {
        rhs: Rhs::Affine {
            slope: 0.0,
            intercept: 0.0,
        },
        source: PressureSource::Restricted(n),
    };
    Ok(solve_pressure_equation(&eq, opts)?
        .relabel("dim F_N")
        .with("N", json!(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_minimiser_hits_hat_form() {
        for &theta in &[0.55, 0.7, 0.9] {
            let g = optimal_gamma(theta);
            let Rhs::Affine { slope, intercept } = type_three_rhs(g, 1.0) else {
                unreachable!()
            };
            let f = slope * theta + intercept;
            let hat = Rhs::Hat { log_c: 1.0 }.eval(theta);
            assert!((f - hat).abs() < 1e-12, "{f} vs {hat}");
            // and it is a minimum
            for dg in [-0.01, 0.01] {
                let Rhs::Affine { slope, intercept } = type_three_rhs(g + dg, 1.0) else {
                    unreachable!()
                };
                assert!(slope * theta + intercept > f);
            }
        }
    }

    #[test]
    fn zero_rhs_gives_one() {
        let r = solve_pressure_equation(
            &affine(0.0, 0.0),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!((r.value_lo, r.value_hi), (1.0, 1.0));
        assert_eq!(theta_big(0.0, 0.0, &SolveOptions::default()).unwrap().value_lo, 1.0);
    }

    #[test]
    fn negative_rhs_at_one_has_no_crossing() {
        let r = solve_pressure_equation(&affine(0.0, -0.5), &SolveOptions::default());
        assert!(matches!(r, Err(Error::NoCrossing(_))));
    }

    #[test]
    fn f1_is_a_point() {
        assert_eq!(dim_F_N(1, &SolveOptions::default()).unwrap().value_hi, 0.0);
    }
}
