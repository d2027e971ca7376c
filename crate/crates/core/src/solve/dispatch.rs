//! Dimension formulas selected from growth profiles.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{eta_d, theta_alpha_beta, theta_hat, theta_log_b, xi_gamma, DimensionResult, SolveOptions};
use crate::error::{Error, Result};
use crate::profile::function::{condition_maxine, function_profile_with, FunctionHorizon, FunctionProfile};
use crate::profile::limits::{classify_limsup, classify_ln_trace, ExtReal, LimitEstimate, LimitRules};
use crate::profile::{classify_sum_function, Generator, GrowthProfile, SumBranch, Tri, Val};

fn ext_json(e: &LimitEstimate) -> Value {
    json!({"value": e.value.to_string(), "converged": e.converged})
}

fn growth_diagnostics(r: DimensionResult, p: &GrowthProfile) -> DimensionResult {
    r.with("alpha", ext_json(&p.alpha))
        .with("beta", ext_json(&p.beta))
        .with("xi", ext_json(&p.xi))
        .with("gamma", ext_json(&p.gamma))
        .with("k_max", json!(p.k_max))
}

fn require_converged(name: &str, e: &LimitEstimate) -> Result<()> {
    if !e.converged || e.value == ExtReal::Unknown {
        return Err(Error::Indeterminate(format!(
            "{name} did not settle on the horizon (last estimate {}); raise the horizon or supply an analytic override",
            e.value
        )));
    }
    Ok(())
}

fn check_growth(p: &GrowthProfile) -> Result<()> {
    let unmet = p.hypotheses.unmet();
    if !unmet.is_empty() {
        return Err(Error::Hypothesis(unmet));
    }
    require_converged("alpha", &p.alpha)
}

/// Shared case (i) and (ii).
fn alpha_finite_or_zero(p: &GrowthProfile, opts: &SolveOptions) -> Result<Option<DimensionResult>> {
    match p.alpha.value {
        ExtReal::Zero => Ok(Some(DimensionResult::exact(1.0, "Theorem A case (ii)"))),
        ExtReal::Finite(a) => {
            require_converged("beta", &p.beta)?;
            let b = match p.beta.value {
                ExtReal::Zero => 0.0,
                ExtReal::Finite(b) => b,
                _ => return Err(Error::Indeterminate("beta must be finite when alpha is".into())),
            };
            let mut r = theta_alpha_beta(a, b.min(a), opts)?.relabel("Theorem A case (i)");
            if b > a {
                r = r.with("note", json!(format!("beta estimate {b} exceeds alpha {a}; clamped")));
            }
            Ok(Some(r))
        }
        _ => Ok(None),
    }
}

/// `dim_H E` from a growth profile.
#[allow(non_snake_case)]
pub fn dim_E(p: &GrowthProfile, opts: &SolveOptions) -> Result<DimensionResult> {
    check_growth(p)?;
    if let Some(r) = alpha_finite_or_zero(p, opts)? {
        return Ok(growth_diagnostics(r, p));
    }
    require_converged("xi", &p.xi)?;
    let v = p.xi.value.inv_shift(2.0).expect("classified");
    Ok(growth_diagnostics(DimensionResult::exact(v, "Theorem A case (iii)"), p)
        .with("formula", json!("1/(2+xi)")))
}

/// `dim_H E_L` from a growth profile.
#[allow(non_snake_case)]
pub fn dim_EL(p: &GrowthProfile, opts: &SolveOptions) -> Result<DimensionResult> {
    check_growth(p)?;
    if let Some(r) = alpha_finite_or_zero(p, opts)? {
        return Ok(growth_diagnostics(r, p));
    }
    require_converged("gamma", &p.gamma)?;
    let v = match p.gamma.value {
        ExtReal::Finite(g) => 1.0 / (g.max(1.0) + 1.0),
        ExtReal::Infinite => 0.0,
        _ => return Err(Error::Indeterminate("gamma unavailable".into())),
    };
    let mut r = growth_diagnostics(DimensionResult::exact(v, "Theorem A case (iii)"), p)
        .with("formula", json!("1/(gamma+1)"));
    if let (ExtReal::Infinite, ExtReal::Finite(g)) = (p.xi.value, p.gamma.value) {
        if g > 1.0 {
            r = r.with(
                "note",
                json!(format!(
                    "xi = inf gives dim E = 0 while gamma = {g:.6} gives dim E_L = {v:.6} > 0"
                )),
            );
        }
    }
    Ok(r)
}

/// `A(ψ)` (liminf of digits) or `M(ψ)` (limsup of the running maximum).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimsupFamily {
    A,
    M,
}

/// `dim_H A(ψ)` or `dim_H M(ψ)` from `B_ψ` and `b_ψ`.
pub fn dim_limsup_family(fp: &FunctionProfile, family: LimsupFamily, opts: &SolveOptions) -> Result<DimensionResult> {
    let thm = match family {
        LimsupFamily::A => "Theorem C",
        LimsupFamily::M => "Theorem G",
    };
    require_converged("B_psi", &fp.b_big)?;
    let diag = |r: DimensionResult| {
        r.with("B_psi", ext_json(&fp.b_big))
            .with("b_psi", ext_json(&fp.b_small))
    };
    match fp.b_big.value {
        ExtReal::Finite(1.0) => Ok(diag(DimensionResult::exact(1.0, format!("{thm} case B_psi = 1")))),
        ExtReal::Finite(b) => Ok(diag(
            theta_log_b(b.ln(), opts)?.relabel(format!("{thm} case 1 < B_psi < inf")),
        )),
        ExtReal::Infinite => {
            require_converged("b_psi", &fp.b_small)?;
            let v = match fp.b_small.value {
                ExtReal::Finite(b) => 1.0 / (b + 1.0),
                ExtReal::Infinite => 0.0,
                _ => return Err(Error::Indeterminate("b_psi unavailable".into())),
            };
            Ok(diag(DimensionResult::exact(v, format!("{thm} case B_psi = inf"))))
        }
        _ => Err(Error::Indeterminate("B_psi unavailable".into())),
    }
}

/// `dim_H M̂(ψ)` (liminf of the running maximum) from `C_ψ` and `c_ψ`.
pub fn dim_liminf_max(fp: &FunctionProfile, opts: &SolveOptions) -> Result<DimensionResult> {
    require_converged("C_psi", &fp.c_big)?;
    let diag = |r: DimensionResult| {
        r.with("C_psi", ext_json(&fp.c_big))
            .with("c_psi", ext_json(&fp.c_small))
            .with("limit_flag", json!(fp.limit_flag))
    };
    match fp.c_big.value {
        ExtReal::Finite(1.0) => Ok(diag(DimensionResult::exact(1.0, "Theorem I case (i)"))),
        ExtReal::Finite(c) => {
            if !fp.limit_flag {
                return Err(Error::LimitFlagMissing(format!(
                    "C_psi = {c:.6} but liminf exp(log psi(n)/n) = {}",
                    fp.b_big.value
                )));
            }
            Ok(diag(theta_hat(c.ln(), opts)?.relabel("Theorem I case (ii)")))
        }
        ExtReal::Infinite => {
            require_converged("c_psi", &fp.c_small)?;
            let v = match fp.c_small.value {
                ExtReal::Finite(c) => 1.0 / (c + 1.0),
                ExtReal::Infinite => 0.0,
                _ => return Err(Error::Indeterminate("c_psi unavailable".into())),
            };
            Ok(diag(DimensionResult::exact(v, "Theorem I case (iii)")))
        }
        _ => Err(Error::Indeterminate("C_psi unavailable".into())),
    }
}

/// A sum-set function `φ`, either from a named family or raw.
#[derive(Debug, Clone)]
pub enum SumFamily {
    /// `exp(n^r)`
    ExpPower { r: f64 },
    /// `exp(c√n + r_1(n))`, `r_1` increasing with `r_1(n)/√n → 0`
    SqrtPlusR1 { c: f64, r1: Generator },
    /// `exp(c√n + r_2(n))`, `r_2` satisfying (maxine)
    SqrtPlusR2 { c: f64, r2: Generator },
    /// `exp(c (⌊d n^{1-r}⌋)^{r/(1-r)} / d^{r/(1-r)})`
    FloorPower { c: f64, d: f64, r: f64 },
    /// `exp(c exp(γ ⌊log n / γ⌋))`
    FloorExp { c: f64, gamma: f64 },
    Raw(Generator),
}

impl SumFamily {
    pub fn describe(&self) -> String {
        match self {
            SumFamily::ExpPower { r } => format!("exp_power(r={r})"),
            SumFamily::SqrtPlusR1 { c, r1 } => format!("sqrt_plus_r1(c={c}, r1={})", r1.label()),
            SumFamily::SqrtPlusR2 { c, r2 } => format!("sqrt_plus_r2(c={c}, r2={})", r2.label()),
            SumFamily::FloorPower { c, d, r } => format!("floor_power(c={c}, d={d}, r={r})"),
            SumFamily::FloorExp { c, gamma } => format!("floor_exp(c={c}, gamma={gamma})"),
            SumFamily::Raw(g) => format!("raw({})", g.label()),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!("{name} must be positive and finite")));
    }
    Ok(())
}

/// `dim_H S(φ)`.
pub fn dim_sum_family(family: &SumFamily, horizon: &FunctionHorizon, opts: &SolveOptions) -> Result<DimensionResult> {
    let rules = LimitRules::default();
    let r = match family {
        SumFamily::ExpPower { r } => {
            positive("r", *r)?;
            if *r < 0.5 {
                DimensionResult::exact(1.0, "Theorem D (full_dimension)")
            } else {
                DimensionResult::exact(0.5, "Liao-Rams jump case r >= 1/2 (exact_half)")
            }
        }
        SumFamily::SqrtPlusR1 { c, r1 } => {
            positive("c", *c)?;
            let grid = sample_grid(horizon);
            let mut prev = f64::NEG_INFINITY;
            let mut lx = Vec::new();
            let mut ly = Vec::new();
            let mut failures = Vec::new();
            for &n in &grid {
                let v = r1.eval(n)?.to_f64();
                if v < prev {
                    failures.push(format!("r1 decreases near n = {n:.3e}"));
                    break;
                }
                prev = v;
                lx.push(n.ln());
                ly.push(if v > 0.0 { v.ln() - 0.5 * n.ln() } else { f64::NEG_INFINITY });
            }
            let est = classify_ln_trace(&lx, &ly, &rules);
            if failures.is_empty() && !(est.value == ExtReal::Zero && est.converged) {
                failures.push(format!("r1(n)/sqrt(n) -> 0 not established ({})", est.value));
            }
            if !failures.is_empty() {
                return Err(Error::Hypothesis(failures));
            }
            DimensionResult::exact(0.5, "Corollary 1 (exact_half_cor1)")
        }
        SumFamily::SqrtPlusR2 { c, r2 } => {
            positive("c", *c)?;
            let g = r2.clone();
            let verdict = condition_maxine(&move |k| Ok(g.eval(k)?.to_f64()), horizon, &rules)?;
            if verdict != Tri::Holds {
                return Err(Error::Hypothesis(vec![format!("(maxine) {verdict:?}")]));
            }
            let mut prev = f64::NEG_INFINITY;
            for n in sample_grid(horizon) {
                let v = c * n.sqrt() + r2.eval(n)?.to_f64();
                if v < prev {
                    return Err(Error::Hypothesis(vec![format!(
                        "c*sqrt(n) + r2(n) decreases near n = {n:.3e}"
                    )]));
                }
                prev = v;
            }
            DimensionResult::exact(0.5, "Corollary 2 (exact_half_cor2)")
        }
        SumFamily::FloorPower { c, d, r } => {
            positive("c", *c)?;
            positive("d", *d)?;
            eta_d(*c, *d, *r, opts)?.relabel(format!("Theorem F case (i) (family_F_i(c={c},d={d},r={r}))"))
        }
        SumFamily::FloorExp { c, gamma } => {
            positive("c", *c)?;
            positive("gamma", *gamma)?;
            xi_gamma(*c, *gamma, opts)?.relabel(format!("Theorem F case (ii) (family_F_ii(c={c},gamma={gamma}))"))
        }
        SumFamily::Raw(g) => {
            let cls = classify_sum_function(g, horizon)?;
            let base = match cls.branch {
                SumBranch::FullDimension => DimensionResult::exact(1.0, "Theorem D (full_dimension)"),
                SumBranch::UpperHalfEd => DimensionResult::upper_bound(0.5, "Theorem E case (i) (upper_half_ed)"),
                SumBranch::UpperHalfLimsup => {
                    DimensionResult::upper_bound(0.5, "Theorem E case (ii) (upper_half_limsup)")
                }
                _ => DimensionResult::indeterminate("indeterminate"),
            };
            base.with("notes", json!(cls.notes))
                .with("sqrt_scale_limsup", ext_json(&cls.profile.sqrt_scale_limsup))
                .with("linear_scale_limsup", ext_json(&cls.profile.linear_scale_limsup))
                .with("condition_ed", json!(cls.profile.condition_ed))
                .with("condition_maxine", json!(cls.profile.condition_maxine))
        }
    };
    Ok(r.with("family", json!(family.describe())))
}

fn sample_grid(h: &FunctionHorizon) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = 0usize;
    loop {
        let n = 2f64.powf(j as f64 / h.per_octave as f64);
        if n > h.n_diff_max.min(h.n_max) {
            return out;
        }
        out.push(n);
        j += 1;
    }
}

/// Function profile shorthand used by the CLI and tests.
pub fn profile_function(f: &Generator, horizon: &FunctionHorizon) -> Result<FunctionProfile> {
    function_profile_with(f, horizon, &LimitRules::default())
}

/// Trace of the Liao–Rams ratio and its limit estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiaoRamsTrace {
    pub ratio: Vec<f64>,
    pub running_min: Vec<f64>,
    pub tail_monotone: bool,
    pub estimate: f64,
    pub error: f64,
    pub ratio_unbounded: bool,
}

/// Neville extrapolation to `x = 0`; returns the diagonal `p_{0..j}(0)` for each `j`.
fn neville_diagonal(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let m = xs.len();
    let mut p = ys.to_vec();
    let mut diag = vec![p[0]];
    for lvl in 1..m {
        for i in 0..m - lvl {
            let (xi, xj) = (xs[i], xs[i + lvl]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
        diag.push(p[0]);
    }
    diag
}

/// `liminf Σ_{k≤n} log v_k / (2 Σ_{k≤n+1} log u_k − log v_{n+1})` on `n ≤ depth`.
pub fn liao_rams_trace(u: &Generator, v: &Generator, depth: usize) -> Result<LiaoRamsTrace> {
    if depth < 12 {
        return Err(Error::domain("depth must be at least 12"));
    }
    let mut ln_u = Vec::with_capacity(depth + 1);
    let mut ln_v = Vec::with_capacity(depth + 1);
    for k in 1..=depth + 1 {
        let uk = u.eval(k as f64)?;
        let vk = v.eval(k as f64)?;
        if vk.cmp_val(&Val::from_f64(1.0)) == std::cmp::Ordering::Less {
            return Err(Error::domain(format!("v_n must be >= 1 (n = {k})")));
        }
        ln_u.push(uk.ln_val().ok_or_else(|| Error::domain("u_n must be positive"))?);
        ln_v.push(vk.ln_val().unwrap());
    }
    let mut ratio = Vec::with_capacity(depth);
    let mut su = ln_u[0];
    let mut sv = Val::ZERO;
    for n in 1..=depth {
        sv = sv.add(&ln_v[n - 1]);
        su = su.add(&ln_u[n]);
        let den = su.add(&su).sub(&ln_v[n]);
        if !den.is_positive() {
            return Err(Error::domain(format!("denominator not positive at n = {n}")));
        }
        ratio.push(sv.div(&den).to_f64());
    }
    let mut running_min = Vec::with_capacity(depth);
    let mut m = f64::INFINITY;
    for r in &ratio {
        m = m.min(*r);
        running_min.push(m);
    }
    // v_n / u_n boundedness
    let lx: Vec<f64> = (1..=depth + 1).map(|k| (k as f64).ln()).collect();
    let l_ratio: Vec<f64> = ln_v
        .iter()
        .zip(&ln_u)
        .map(|(a, b)| a.sub(b).to_f64())
        .collect();
    let sup = classify_limsup(&lx, &l_ratio, &LimitRules::default());
    let ratio_unbounded = sup.value == ExtReal::Infinite;

    let tail = &ratio[depth / 2..];
    let up = tail.windows(2).all(|w| w[1] >= w[0]);
    let down = tail.windows(2).all(|w| w[1] <= w[0]);
    let tail_monotone = up || down;
    let (estimate, error) = if tail_monotone {
        // six nodes evenly spaced in x = 1/n over [1/N, 2/N]
        let nn = depth as f64;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in 0..6 {
            let n = (nn / (1.0 + j as f64 / 5.0)).round() as usize;
            if xs.last() == Some(&(1.0 / n as f64)) {
                continue;
            }
            xs.push(1.0 / n as f64);
            ys.push(ratio[n - 1]);
        }
        let diag = neville_diagonal(&xs, &ys);
        let mut best = (diag[0], (ratio[depth - 1] - ratio[depth - 2]).abs() * nn);
        for j in 1..diag.len() {
            let e = (diag[j] - diag[j - 1]).abs();
            if e < best.1 {
                best = (diag[j], e);
            }
        }
        best
    } else {
        let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        let q = &ratio[depth - depth / 4..];
        let lo_q = q.iter().cloned().fold(f64::INFINITY, f64::min);
        (lo, (lo_q - lo).abs())
    };
    Ok(LiaoRamsTrace {
        ratio,
        running_min,
        tail_monotone,
        estimate,
        error,
        ratio_unbounded,
    })
}

/// Lower-bound exponent from the Liao–Rams lemma for `u_n, v_n`.
pub fn dim_liao_rams(u: &Generator, v: &Generator, depth: usize) -> Result<DimensionResult> {
    let t = liao_rams_trace(u, v, depth)?;
    let lo = (t.estimate - t.error).clamp(0.0, 1.0);
    let hi = (t.estimate + t.error).clamp(0.0, 1.0);
    let mut r = DimensionResult::enclosure(lo, hi, "Liao-Rams lemma")
        .with("estimate", json!(t.estimate))
        .with("error", json!(t.error))
        .with("tail_monotone", json!(t.tail_monotone))
        .with("last_ratio", json!(t.ratio.last()))
        .with("running_min", json!(t.running_min.last()))
        .with("depth", json!(depth));
    if t.ratio_unbounded {
        r = r.with("warning", json!("v_n/u_n appears unbounded; the lemma needs limsup v_n/u_n < inf"));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> Generator {
        Generator::parse_plain(s).unwrap()
    }

    #[test]
    fn liao_rams_closed_forms() {
        let r = dim_liao_rams(&g("exp(n^2)"), &g("exp(n^2)"), 50).unwrap();
        assert!((r.midpoint() - 0.5).abs() < 1e-6, "{r:?}");
        let r = dim_liao_rams(&g("3^n"), &g("3^n"), 50).unwrap();
        assert!((r.midpoint() - 0.5).abs() < 1e-6, "{r:?}");
        let r = dim_liao_rams(&g("2^(3^n)"), &g("2^(3^n)"), 50).unwrap();
        assert!((r.midpoint() - 0.25).abs() < 1e-6, "{r:?}");
    }

    fn triple(n: &str, s: &str) -> crate::profile::SequenceTriple {
        crate::profile::SequenceTriple::symmetric(g(n), g(s))
    }

    #[test]
    fn growth_and_function_routes_agree() {
        let opts = SolveOptions::with_tol(1e-3);
        let p = crate::profile::growth_profile(&triple("2^(k^2)", "3^n_k"), 48).unwrap();
        let e = dim_E(&p, &opts).unwrap();
        assert_eq!(e.branch, "Theorem A case (i)");
        let fp = profile_function(&g("3^n"), &FunctionHorizon::default()).unwrap();
        let a = dim_limsup_family(&fp, LimsupFamily::A, &opts).unwrap();
        assert!((e.midpoint() - a.midpoint()).abs() <= 2e-3, "{e:?} {a:?}");
    }

    #[test]
    fn tower_separates_e_and_el() {
        let opts = SolveOptions::default();
        let p = crate::profile::growth_profile(&triple("k^4", "exp(e^(k^2))"), 64).unwrap();
        assert_eq!(dim_E(&p, &opts).unwrap().value_hi, 0.0);
        assert_eq!(dim_EL(&p, &opts).unwrap().value_lo, 0.5);
    }

    #[test]
    fn failed_hypothesis_is_reported() {
        let p = crate::profile::growth_profile(&triple("2*k", "2^k"), 64).unwrap();
        match dim_E(&p, &SolveOptions::default()) {
            Err(Error::Hypothesis(v)) => assert!(v.iter().any(|s| s.contains("H1"))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn liminf_max_needs_limit_flag() {
        let fp = profile_function(
            &g("2^(2^(floor(sqrt(log2(n)))^2))"),
            &FunctionHorizon::default(),
        )
        .unwrap();
        assert!(!fp.limit_flag);
        assert!(matches!(
            dim_liminf_max(&fp, &SolveOptions::default()),
            Err(Error::LimitFlagMissing(_))
        ));
    }

    #[test]
    fn sum_families() {
        let h = FunctionHorizon::default();
        let o = SolveOptions::default();
        let r = dim_sum_family(&SumFamily::ExpPower { r: 0.3 }, &h, &o).unwrap();
        assert_eq!(r.value_lo, 1.0);
        let r = dim_sum_family(&SumFamily::SqrtPlusR1 { c: 2.0, r1: g("log(n)") }, &h, &o).unwrap();
        assert_eq!((r.value_lo, r.value_hi), (0.5, 0.5));
        let r = dim_sum_family(&SumFamily::Raw(g("exp(n^2)")), &h, &o).unwrap();
        assert_eq!((r.value_lo, r.value_hi), (0.0, 0.5));
        assert!(dim_sum_family(&SumFamily::SqrtPlusR1 { c: 2.0, r1: g("n") }, &h, &o).is_err());
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let xs = [0.1, 0.2, 0.3, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x + x * x * x).collect();
        let d = neville_diagonal(&xs, &ys);
        assert!((d[3] - 2.0).abs() < 1e-12);
    }
}
