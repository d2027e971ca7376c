//! Growth invariants α, β, ξ, γ of a triple `({n_k}, {s_k}, {t_k})`.

use serde::{Deserialize, Serialize};

use super::expr::Generator;
use super::limits::{classify_limsup, classify_liminf, classify_ln_trace, ExtReal, LimitEstimate, LimitRules};
use super::value::Val;
use crate::error::{Error, Result};

/// Analytic values that replace the numeric estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub alpha: Option<ExtReal>,
    pub beta: Option<ExtReal>,
    pub xi: Option<ExtReal>,
    pub gamma: Option<ExtReal>,
    /// Treat (H1)–(H3) as verified.
    pub assume_hypotheses: bool,
}

#[derive(Debug, Clone)]
pub struct SequenceTriple {
    pub n_gen: Generator,
    pub s_gen: Generator,
    pub t_gen: Generator,
    pub overrides: Overrides,
}

impl SequenceTriple {
    pub fn new(n_gen: Generator, s_gen: Generator, t_gen: Generator) -> Self {
        Self {
            n_gen,
            s_gen,
            t_gen,
            overrides: Overrides::default(),
        }
    }

    /// `t_k = s_k`.
    pub fn symmetric(n_gen: Generator, s_gen: Generator) -> Self {
        Self::new(n_gen, s_gen.clone(), s_gen)
    }

    pub fn with_overrides(mut self, o: Overrides) -> Self {
        self.overrides = o;
        self
    }

    /// `(n_k, s_k, t_k)` for `k = 1..=k_max`, checking that `n_k` increases.
    pub fn evaluate(&self, k_max: usize) -> Result<Vec<(Val, Val, Val)>> {
        let mut out: Vec<(Val, Val, Val)> = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let kf = k as f64;
            let n = self.n_gen.eval(kf)?;
            if !n.is_positive() {
                return Err(Error::domain(format!("n_k must be positive (k = {k})")));
            }
            if let Some((prev, _, _)) = out.last() {
                if n.cmp_val(prev) != std::cmp::Ordering::Greater {
                    return Err(Error::domain(format!("n_k must be strictly increasing (k = {k})")));
                }
            }
            let s = self.s_gen.eval_with(kf, Some(n))?;
            let t = self.t_gen.eval_with(kf, Some(n))?;
            out.push((n, s, t));
        }
        Ok(out)
    }
}

/// Per-k traces behind a [`GrowthProfile`], all in log form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthTraces {
    pub ln_n: Vec<f64>,
    /// `ln((1/n_k) Σ_{j≤k} log s_j)`
    pub ln_alpha: Vec<f64>,
    /// `ln(log s_k / n_k)`
    pub ln_beta: Vec<f64>,
    /// `ln(log s_{k+1} / Σ_{j≤k} log s_j)`, one shorter
    pub ln_xi: Vec<f64>,
    /// `ln(log log s_k / n_k)`, i.e. `ln ln γ_k`
    pub ln_ln_gamma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: Verdict,
    pub h2: Verdict,
    pub h3: Verdict,
    /// Last values of `n_k/k`, `log s_k / log t_k`, and the α, β traces.
    pub witness: Vec<(String, f64)>,
}

impl HypothesisReport {
    /// Hypotheses not verified, as `(H1)`-style labels.
    pub fn unmet(&self) -> Vec<String> {
        [("(H1)", self.h1), ("(H2)", self.h2), ("(H3)", self.h3)]
            .iter()
            .filter(|(_, v)| *v != Verdict::Holds)
            .map(|(l, v)| format!("{l} {}", if *v == Verdict::Fails { "fails" } else { "inconclusive" }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub alpha: LimitEstimate,
    pub beta: LimitEstimate,
    pub xi: LimitEstimate,
    pub gamma: LimitEstimate,
    pub k_max: usize,
    pub hypotheses: HypothesisReport,
    pub traces: GrowthTraces,
    pub notes: Vec<String>,
}

fn ln_pos(v: &Val) -> f64 {
    if v.is_positive() {
        v.ln_abs()
    } else if v.is_zero() {
        f64::NEG_INFINITY
    } else {
        f64::NAN
    }
}

/// Growth invariants over `k = 1..=k_max`.
pub fn growth_profile(t: &SequenceTriple, k_max: usize) -> Result<GrowthProfile> {
    growth_profile_with(t, k_max, &LimitRules::default())
}

pub fn growth_profile_with(t: &SequenceTriple, k_max: usize, rules: &LimitRules) -> Result<GrowthProfile> {
    if k_max < 8 {
        return Err(Error::domain("k_max must be at least 8"));
    }
    let vals = t.evaluate(k_max + 1)?;
    let mut tr = GrowthTraces::default();
    let mut lx = Vec::with_capacity(k_max);
    let mut sum_ln_s = Val::ZERO;
    let mut ln_s: Vec<Val> = Vec::with_capacity(k_max + 1);
    let mut ln_t: Vec<Val> = Vec::with_capacity(k_max + 1);
    let mut small_s = 0usize;
    for (_, s, tt) in &vals {
        if !s.is_positive() || !tt.is_positive() {
            return Err(Error::domain("s_k and t_k must be positive"));
        }
        ln_s.push(s.ln_val().unwrap());
        ln_t.push(tt.ln_val().unwrap());
    }
    let mut ln_ratio_h1 = Vec::with_capacity(k_max);
    let mut ln_h2 = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let (n, s, _) = &vals[k - 1];
        lx.push((k as f64).ln());
        let ln_nk = n.ln_abs();
        tr.ln_n.push(ln_nk);
        ln_ratio_h1.push(ln_nk - (k as f64).ln());
        let ls = ln_s[k - 1];
        sum_ln_s = sum_ln_s.add(&ls);
        tr.ln_alpha.push(ln_pos(&sum_ln_s.div(n)));
        tr.ln_beta.push(ln_pos(&ls.div(n)));
        tr.ln_xi.push(ln_pos(&ln_s[k].div(&sum_ln_s)));
        match s.lnln() {
            Some(ll) if ll > 0.0 => tr.ln_ln_gamma.push(ll.ln() - ln_nk),
            Some(_) => tr.ln_ln_gamma.push(f64::NEG_INFINITY),
            None => {
                small_s += usize::from(k > k_max / 2);
                tr.ln_ln_gamma.push(f64::NAN);
            }
        }
        // log s_k / log t_k against 1
        let r = ls.div(&ln_t[k - 1]).sub(&Val::from_f64(1.0));
        ln_h2.push(if r.is_zero() { f64::NEG_INFINITY } else { r.ln_abs() });
    }
    let mut notes = Vec::new();
    let o = &t.overrides;
    let pick = |ov: Option<ExtReal>, est: LimitEstimate| match ov {
        Some(v) => LimitEstimate::overridden(v),
        None => est,
    };
    let alpha = pick(o.alpha, classify_ln_trace(&lx, &tr.ln_alpha, rules));
    let beta = pick(o.beta, classify_ln_trace(&lx, &tr.ln_beta, rules));
    let xi = pick(o.xi, classify_limsup(&lx, &tr.ln_xi, rules));
    let gamma_est = if small_s > 0 {
        notes.push("s_k <= 1 in the tail: log log s_k undefined, gamma unknown".to_string());
        LimitEstimate {
            value: ExtReal::Unknown,
            converged: false,
            last_ln: f64::NAN,
            slope: f64::NAN,
        }
    } else {
        classify_limsup(&lx, &tr.ln_ln_gamma, rules).exp_of()
    };
    let gamma = pick(o.gamma, gamma_est);

    // hypotheses
    let h1 = match classify_ln_trace(&lx, &ln_ratio_h1, rules) {
        LimitEstimate {
            value: ExtReal::Infinite,
            converged: true,
            ..
        } => Verdict::Holds,
        LimitEstimate {
            value: ExtReal::Finite(_) | ExtReal::Zero,
            converged: true,
            ..
        } => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    let h2 = match classify_ln_trace(&lx, &ln_h2, rules) {
        LimitEstimate {
            value: ExtReal::Zero,
            converged: true,
            ..
        } => Verdict::Holds,
        LimitEstimate {
            value: ExtReal::Finite(_) | ExtReal::Infinite,
            converged: true,
            ..
        } => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    let h3 = h3_verdict(&lx, &tr, &alpha, &beta, rules);
    let witness = vec![
        ("n_k/k".to_string(), ln_ratio_h1.last().copied().unwrap_or(f64::NAN).exp()),
        (
            "|log s_k/log t_k - 1|".to_string(),
            ln_h2.last().copied().unwrap_or(f64::NAN).exp(),
        ),
        ("alpha_k".to_string(), tr.ln_alpha.last().copied().unwrap_or(f64::NAN).exp()),
        ("beta_k".to_string(), tr.ln_beta.last().copied().unwrap_or(f64::NAN).exp()),
    ];
    let hypotheses = if o.assume_hypotheses {
        HypothesisReport {
            h1: Verdict::Holds,
            h2: Verdict::Holds,
            h3: Verdict::Holds,
            witness,
        }
    } else {
        HypothesisReport { h1, h2, h3, witness }
    };
    if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (alpha.value, beta.value) {
        if alpha.converged && beta.converged && a + 1e-9 * a < b * (1.0 - rules.cauchy_rel) {
            notes.push(format!("alpha estimate {a} below beta estimate {b}"));
        }
    }
    Ok(GrowthProfile {
        alpha,
        beta,
        xi,
        gamma,
        k_max,
        hypotheses,
        traces: tr,
        notes,
    })
}

fn h3_verdict(lx: &[f64], tr: &GrowthTraces, alpha: &LimitEstimate, beta: &LimitEstimate, rules: &LimitRules) -> Verdict {
    if alpha.converged && beta.converged && alpha.value != ExtReal::Unknown && beta.value != ExtReal::Unknown {
        return Verdict::Holds;
    }
    // a limit fails to exist when the envelopes separate
    for ly in [&tr.ln_alpha, &tr.ln_beta] {
        let lo = classify_liminf(lx, ly, rules);
        let hi = classify_limsup(lx, ly, rules);
        if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (lo.value, hi.value) {
            if lo.converged && hi.converged && (b - a) > 10.0 * rules.cauchy_rel * b {
                return Verdict::Fails;
            }
        }
        if lo.converged && hi.converged && lo.value == ExtReal::Zero && hi.value != ExtReal::Zero {
            return Verdict::Fails;
        }
    }
    Verdict::Inconclusive
}

/// (H1)–(H3) verdicts for `t` over `k = 1..=k_max`.
pub fn check_hypotheses(t: &SequenceTriple, k_max: usize) -> Result<HypothesisReport> {
    Ok(growth_profile(t, k_max)?.hypotheses)
}
