//! Invariants of a function ψ or φ: `B_ψ, b_ψ, C_ψ, c_ψ`, the √n and n scales,
//! conditions (ed) and (maxine), and the sum-set classifier.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::expr::Generator;
use super::limits::{classify_liminf, classify_limsup, classify_ln_trace, ExtReal, LimitEstimate, LimitRules};
use super::value::Val;
use crate::error::{Error, Result};

/// Three-valued test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Holds,
    Fails,
    Unknown,
}

/// Sampling horizon for function profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionHorizon {
    pub n_max: f64,
    /// Samples per doubling of `n`.
    pub per_octave: usize,
    /// Largest `n` for the difference tests, where `log φ` must still resolve `O(1)` steps.
    pub n_diff_max: f64,
}

impl Default for FunctionHorizon {
    fn default() -> Self {
        Self {
            n_max: 1e30,
            per_octave: 16,
            n_diff_max: 1e12,
        }
    }
}

impl FunctionHorizon {
    pub fn with_n_max(n_max: f64) -> Self {
        Self {
            n_max,
            n_diff_max: n_max.min(1e12),
            ..Self::default()
        }
    }

    fn grid(&self, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut j = 0usize;
        loop {
            let n = 2f64.powf(j as f64 / self.per_octave as f64);
            if n > hi {
                break;
            }
            out.push(n);
            j += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionTraces {
    pub n: Vec<f64>,
    /// `ln ψ(n)` (may be `inf` past float range)
    pub ln_psi: Vec<f64>,
    /// `ln ln ψ(n)`
    pub lnln_psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionProfile {
    /// `liminf exp(log ψ(n)/n)`
    pub b_big: LimitEstimate,
    /// `liminf exp(log log ψ(n)/n)`
    pub b_small: LimitEstimate,
    /// `limsup exp(log ψ(n)/n)`
    pub c_big: LimitEstimate,
    /// `limsup exp(log log ψ(n)/n)`
    pub c_small: LimitEstimate,
    /// `limsup log ψ(n)/n` equals the liminf (both classified alike).
    pub limit_flag: bool,
    /// `limsup log φ(n)/√n`
    pub sqrt_scale_limsup: LimitEstimate,
    /// `limsup log φ(n)/n`
    pub linear_scale_limsup: LimitEstimate,
    /// `lim φ(n)/n`
    pub over_linear: LimitEstimate,
    pub increasing: bool,
    pub condition_ed: Tri,
    pub condition_maxine: Tri,
    pub horizon: FunctionHorizon,
    pub traces: FunctionTraces,
}

fn ln_of(v: &Val) -> f64 {
    if v.is_positive() {
        v.ln_abs()
    } else {
        f64::NAN
    }
}

fn lnln_of(v: &Val) -> f64 {
    match v.lnln() {
        Some(x) => x,
        None if v.is_positive() => f64::NEG_INFINITY,
        None => f64::NAN,
    }
}

/// Profile of `f` on a geometric grid up to `horizon.n_max`.
pub fn function_profile(f: &Generator, horizon: &FunctionHorizon) -> Result<FunctionProfile> {
    function_profile_with(f, horizon, &LimitRules::default())
}

pub fn function_profile_with(f: &Generator, horizon: &FunctionHorizon, rules: &LimitRules) -> Result<FunctionProfile> {
    if !(horizon.n_max >= 64.0) {
        return Err(Error::domain("n_max must be at least 64"));
    }
    let grid = horizon.grid(horizon.n_max);
    let mut tr = FunctionTraces::default();
    let mut vals = Vec::with_capacity(grid.len());
    for &n in &grid {
        let v = f.eval(n)?;
        if !v.is_positive() {
            return Err(Error::domain(format!("f({n}) is not positive")));
        }
        tr.n.push(n);
        tr.ln_psi.push(ln_of(&v));
        tr.lnln_psi.push(lnln_of(&v));
        vals.push(v);
    }
    let lx: Vec<f64> = grid.iter().map(|n| n.ln()).collect();
    // ln(log ψ / n), ln(log log ψ / n), ln(log ψ / √n), ln(ψ / n)
    let y_lin: Vec<f64> = tr.lnln_psi.iter().zip(&lx).map(|(l, x)| l - x).collect();
    let y_sqrt: Vec<f64> = tr.lnln_psi.iter().zip(&lx).map(|(l, x)| l - 0.5 * x).collect();
    let y_ll: Vec<f64> = vals
        .iter()
        .zip(&lx)
        .map(|(v, x)| match v.lnln() {
            Some(ll) if ll > 0.0 => ll.ln() - x,
            Some(_) => f64::NEG_INFINITY,
            None => f64::NEG_INFINITY,
        })
        .collect();
    let y_over: Vec<f64> = tr.ln_psi.iter().zip(&lx).map(|(l, x)| l - x).collect();

    let lin_inf = classify_liminf(&lx, &y_lin, rules);
    let lin_sup = classify_limsup(&lx, &y_lin, rules);
    let limit_flag = lin_inf.converged
        && lin_sup.converged
        && match (lin_inf.value, lin_sup.value) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (b - a).abs() <= rules.cauchy_rel * b.abs().max(a.abs()),
            (a, b) => a == b && a != ExtReal::Unknown,
        };
    let increasing = vals
        .windows(2)
        .all(|w| w[1].cmp_val(&w[0]) != std::cmp::Ordering::Less);
    let sqrt_scale = classify_limsup(&lx, &y_sqrt, rules);
    let profile = FunctionProfile {
        b_big: lin_inf.exp_of(),
        b_small: classify_liminf(&lx, &y_ll, rules).exp_of(),
        c_big: lin_sup.exp_of(),
        c_small: classify_limsup(&lx, &y_ll, rules).exp_of(),
        limit_flag,
        sqrt_scale_limsup: sqrt_scale,
        linear_scale_limsup: lin_sup,
        over_linear: classify_ln_trace(&lx, &y_over, rules),
        increasing,
        condition_ed: condition_ed(f, horizon, rules)?,
        condition_maxine: match sqrt_scale.value {
            ExtReal::Finite(c) if sqrt_scale.converged => {
                let cc = c;
                let g = f.clone();
                condition_maxine(&move |k| Ok(ln_of(&g.eval(k)?) - cc * k.sqrt()), horizon, rules)?
            }
            _ => Tri::Unknown,
        },
        horizon: *horizon,
        traces: tr,
    };
    Ok(profile)
}

/// (ed): for each ε in {1, 1/2, 1/4}, `log φ(n+ε√n) - log φ(n)` stays above some δ > 0.
pub fn condition_ed(f: &Generator, horizon: &FunctionHorizon, rules: &LimitRules) -> Result<Tri> {
    let grid: Vec<f64> = horizon.grid(horizon.n_diff_max.min(horizon.n_max));
    let lx: Vec<f64> = grid.iter().map(|n| n.ln()).collect();
    let mut all_hold = true;
    for eps in [1.0, 0.5, 0.25] {
        let mut ld = Vec::with_capacity(grid.len());
        for &n in &grid {
            let a = f.eval(n)?.ln_val().ok_or_else(|| Error::domain("f must be positive"))?;
            let b = f
                .eval(n + eps * n.sqrt())?
                .ln_val()
                .ok_or_else(|| Error::domain("f must be positive"))?;
            let d = b.sub(&a);
            ld.push(if d.is_positive() {
                d.ln_abs()
            } else {
                f64::NEG_INFINITY
            });
        }
        let tail = &ld[ld.len() / 2..];
        if tail.contains(&f64::NEG_INFINITY) {
            return Ok(Tri::Fails);
        }
        let est = classify_liminf(&lx, &ld, rules);
        match (est.value, est.converged) {
            (ExtReal::Zero, true) => return Ok(Tri::Fails),
            (ExtReal::Finite(_) | ExtReal::Infinite, true) => {}
            _ => all_hold = false,
        }
    }
    Ok(if all_hold { Tri::Holds } else { Tri::Unknown })
}

/// (maxine): `max_{m² < k ≤ (m+1)²} |r(k) - r(m²)| → 0`.
pub fn condition_maxine(r: &dyn Fn(f64) -> Result<f64>, horizon: &FunctionHorizon, rules: &LimitRules) -> Result<Tri> {
    let m_max = horizon.n_diff_max.min(horizon.n_max).sqrt();
    let ms: Vec<f64> = horizon.grid(m_max).into_iter().map(f64::floor).filter(|m| *m >= 2.0).collect();
    let mut ms_dedup: Vec<f64> = Vec::new();
    for m in ms {
        if ms_dedup.last() != Some(&m) {
            ms_dedup.push(m);
        }
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &m in &ms_dedup {
        let base = r(m * m)?;
        let width = 2.0 * m + 1.0;
        let steps = (width as usize).min(32);
        let mut worst = 0.0f64;
        for i in 1..=steps {
            let k = (m * m + (i as f64 * width / steps as f64).round()).min((m + 1.0) * (m + 1.0));
            worst = worst.max((r(k)? - base).abs());
        }
        lx.push(m.ln());
        ly.push(if worst > 0.0 { worst.ln() } else { f64::NEG_INFINITY });
    }
    let est = classify_limsup(&lx, &ly, rules);
    Ok(match (est.value, est.converged) {
        (ExtReal::Zero, true) => Tri::Holds,
        (ExtReal::Finite(_) | ExtReal::Infinite, true) => Tri::Fails,
        _ => Tri::Unknown,
    })
}

/// Outcome of [`classify_sum_function`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum SumBranch {
    FullDimension,
    UpperHalfEd,
    UpperHalfLimsup,
    ExactHalfCor1,
    ExactHalfCor2,
    FamilyFI { c: f64, d: f64, r: f64 },
    FamilyFII { c: f64, gamma: f64 },
    Indeterminate,
}

impl fmt::Display for SumBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumBranch::FullDimension => write!(f, "full_dimension"),
            SumBranch::UpperHalfEd => write!(f, "upper_half_ed"),
            SumBranch::UpperHalfLimsup => write!(f, "upper_half_limsup"),
            SumBranch::ExactHalfCor1 => write!(f, "exact_half_cor1"),
            SumBranch::ExactHalfCor2 => write!(f, "exact_half_cor2"),
            SumBranch::FamilyFI { c, d, r } => write!(f, "family_F_i(c={c},d={d},r={r})"),
            SumBranch::FamilyFII { c, gamma } => write!(f, "family_F_ii(c={c},gamma={gamma})"),
            SumBranch::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumClassification {
    pub branch: SumBranch,
    pub notes: Vec<String>,
    pub profile: FunctionProfile,
}

/// Decides which sum-set theorem applies to a raw increasing `φ`.
pub fn classify_sum_function(f: &Generator, horizon: &FunctionHorizon) -> Result<SumClassification> {
    let profile = function_profile(f, horizon)?;
    let mut notes = Vec::new();
    let branch = if !profile.increasing {
        notes.push("phi is not nondecreasing on the sampled grid".to_string());
        SumBranch::Indeterminate
    } else if !(profile.over_linear.value == ExtReal::Infinite && profile.over_linear.converged) {
        notes.push(format!(
            "phi(n)/n -> inf not established (estimate {})",
            profile.over_linear.value
        ));
        SumBranch::Indeterminate
    } else if profile.sqrt_scale_limsup.value == ExtReal::Zero && profile.sqrt_scale_limsup.converged {
        notes.push("limsup log phi(n)/sqrt(n) = 0".to_string());
        SumBranch::FullDimension
    } else if profile.linear_scale_limsup.value == ExtReal::Infinite && profile.linear_scale_limsup.converged {
        notes.push("limsup log phi(n)/n = inf".to_string());
        SumBranch::UpperHalfLimsup
    } else if profile.condition_ed == Tri::Holds {
        notes.push("condition (ed) holds for eps in {1, 1/2, 1/4}".to_string());
        SumBranch::UpperHalfEd
    } else {
        notes.push(format!(
            "phi(n)/n -> inf but no branch applies: sqrt scale {}, linear scale {}, (ed) {:?}",
            profile.sqrt_scale_limsup.value, profile.linear_scale_limsup.value, profile.condition_ed
        ));
        SumBranch::Indeterminate
    };
    Ok(SumClassification {
        branch,
        notes,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn gen(s: &str, params: &[(&str, f64)]) -> Generator {
        let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Generator::parse(s, &p).unwrap()
    }

    #[test]
    fn geometric_psi() {
        let p = function_profile(&gen("B^n", &[("B", 3.0)]), &FunctionHorizon::default()).unwrap();
        assert!(matches!(p.b_big.value, ExtReal::Finite(b) if (b - 3.0).abs() < 1e-9));
        assert!(matches!(p.c_big.value, ExtReal::Finite(b) if (b - 3.0).abs() < 1e-9));
        assert!(p.limit_flag);
    }

    #[test]
    fn doubly_exponential_psi() {
        let p = function_profile(&gen("b^(c^n)", &[("b", 2.0), ("c", 3.0)]), &FunctionHorizon::default()).unwrap();
        assert_eq!(p.b_big.value, ExtReal::Infinite);
        assert!(matches!(p.b_small.value, ExtReal::Finite(b) if (b - 3.0).abs() < 1e-6), "{:?}", p.b_small);
    }

    #[test]
    fn sqrt_scale_and_ed() {
        let p = function_profile(&gen("exp(c*sqrt(n))", &[("c", 2.0)]), &FunctionHorizon::default()).unwrap();
        assert!(matches!(p.sqrt_scale_limsup.value, ExtReal::Finite(c) if (c - 2.0).abs() < 1e-9));
        assert_eq!(p.condition_ed, Tri::Holds);
        assert_eq!(p.condition_maxine, Tri::Holds);
    }

    #[test]
    fn piecewise_limsup_is_not_a_limit() {
        let p = function_profile(
            &gen("C^(2^(floor(sqrt(log2(n)))^2))", &[("C", 2.0)]),
            &FunctionHorizon::default(),
        )
        .unwrap();
        assert!(!p.limit_flag);
        assert!(matches!(p.c_big.value, ExtReal::Finite(c) if (c - 2.0).abs() < 1e-6), "{:?}", p.c_big);
    }

    #[test]
    fn classifier_examples() {
        let h = FunctionHorizon::default();
        let b = |s: &str| classify_sum_function(&gen(s, &[]), &h).unwrap().branch;
        assert_eq!(b("exp(n^0.4)"), SumBranch::FullDimension);
        assert_eq!(b("exp(n^0.3)"), SumBranch::FullDimension);
        assert_eq!(b("exp(n^0.7)"), SumBranch::UpperHalfEd);
        assert_eq!(b("exp(n^2)"), SumBranch::UpperHalfLimsup);
        assert_eq!(b("2*n"), SumBranch::Indeterminate);
    }
}
