//! The Wang–Wu quantity `s_n(B) = inf{ρ >= 0 : f_n(ρ, B) < 1}` with
//! `f_n(ρ, B) = Σ_{a_1..a_n} (B^n q_n^2)^{-ρ}`, bracketed by truncated enumeration.
//!
//! Digits `a_1..a_{n-1}` run up to `A`; the last digit is summed in closed form,
//! `Σ_{a>=1} (a q + q')^{-2ρ} = q^{-2ρ} ζ(2ρ, 1 + q'/q)`. Words with an earlier digit
//! above `A` are bounded with `q(uav) >= q(ua) q(v)` and upper bounds on the full
//! sums at shorter depths, obtained the same way.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::hurwitz_zeta;

/// Options for [`wang_wu_s_n`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WangWuOptions {
    /// Digit truncation `A` for all but the last position.
    pub truncation: u64,
    /// Widest accepted bracket; wider ones mean the tail bound dominates.
    pub max_width: f64,
    /// Bisection tolerance in `ρ`.
    pub tol: f64,
    /// Bins of `q'/q` for the monotone Hurwitz table.
    pub bins: usize,
}

impl Default for WangWuOptions {
    fn default() -> Self {
        Self {
            truncation: 24,
            max_width: 0.1,
            tol: 1e-9,
            bins: 4096,
        }
    }
}

/// Bracket `[lo, hi]` containing `s_n(B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WangWuBracket {
    pub b: f64,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub truncation: u64,
    /// Tail bound over truncated sum at `hi`.
    pub tail_ratio: f64,
}

/// Prefix data per depth: `(ln q, q'/q)` for every word over `1..=A`.
struct Prefixes {
    by_depth: Vec<Vec<(f64, f64)>>,
}

impl Prefixes {
    fn build(a_max: u64, depth: usize) -> Self {
        let mut by_depth = Vec::with_capacity(depth + 1);
        let mut cur: Vec<(u64, u64)> = vec![(1, 0)];
        for d in 0..=depth {
            by_depth.push(cur.iter().map(|&(q, qp)| ((q as f64).ln(), qp as f64 / q as f64)).collect());
            if d == depth {
                break;
            }
            cur = cur
                .iter()
                .flat_map(|&(q, qp)| (1..=a_max).map(move |a| (a * q + qp, q)))
                .collect();
        }
        Prefixes { by_depth }
    }
}

/// `ζ(s, c + r)` on a grid of `r ∈ [0, 1]`, read at the bin end that bounds it in
/// the requested direction (the function decreases in `r`).
struct ZetaTable {
    values: Vec<f64>,
}

impl ZetaTable {
    fn new(s: f64, c: f64, bins: usize) -> Self {
        Self {
            values: (0..=bins).map(|i| hurwitz_zeta(s, c + i as f64 / bins as f64)).collect(),
        }
    }

    fn upper(&self, r: f64) -> f64 {
        let bins = self.values.len() - 1;
        self.values[((r * bins as f64).floor() as usize).min(bins)]
    }

    fn lower(&self, r: f64) -> f64 {
        let bins = self.values.len() - 1;
        self.values[((r * bins as f64).ceil() as usize).min(bins)]
    }
}

/// Deterministic parallel sum: fixed chunks, ordered merge.
fn chunked_sum<F: Fn(&(f64, f64)) -> f64 + Sync>(items: &[(f64, f64)], f: F) -> f64 {
    let parts: Vec<f64> = items.par_chunks(1 << 14).map(|c| c.iter().map(&f).sum()).collect();
    parts.iter().sum()
}

/// `Σ q_n^{-2ρ}` over all words of length `n`: lower bound (truncated) and upper bound
/// (truncated plus tails), for `n = 0..=depth`.
fn sums(pre: &Prefixes, rho: f64, depth: usize, opts: &WangWuOptions) -> Vec<(f64, f64)> {
    let s = 2.0 * rho;
    let last = ZetaTable::new(s, 1.0, opts.bins);
    let beyond = ZetaTable::new(s, opts.truncation as f64 + 1.0, opts.bins);
    let mut out = vec![(1.0, 1.0)];
    // tail_j = Σ_{|u| = j, digits <= A} q(u)^{-2ρ} ζ(2ρ, A + 1 + q'/q)
    let tails: Vec<f64> = (0..depth)
        .map(|j| chunked_sum(&pre.by_depth[j], |&(lq, r)| (-s * lq).exp() * beyond.upper(r)))
        .collect();
    for n in 1..=depth {
        let items = &pre.by_depth[n - 1];
        let lo = chunked_sum(items, |&(lq, r)| (-s * lq).exp() * last.lower(r));
        let hi_trunc = chunked_sum(items, |&(lq, r)| (-s * lq).exp() * last.upper(r));
        // first digit above A at position i <= n-1
        let mut tail = 0.0;
        for i in 1..n {
            tail += tails[i - 1] * out[n - i].1;
        }
        out.push((lo, hi_trunc + tail));
    }
    out
}

/// Bracket of `s_n(B)` over `ρ ∈ (1/2, 1]`.
pub fn wang_wu_s_n(b: f64, n: usize, opts: &WangWuOptions) -> Result<WangWuBracket> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::domain("B must exceed 1"));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if opts.truncation < 1 {
        return Err(Error::domain("truncation must be at least 1"));
    }
    let words = (opts.truncation as f64).powi(n as i32 - 1);
    if words > 5e7 {
        return Err(Error::Budget(format!("{words:.3e} prefixes exceed the budget of 5e7")));
    }
    let pre = Prefixes::build(opts.truncation, n - 1);
    let ln_b = b.ln();
    // returns (ln f lower, ln f upper, tail ratio)
    let eval = |rho: f64| {
        let all = sums(&pre, rho, n, opts);
        let (lo, hi) = all[n];
        let scale = -(n as f64) * rho * ln_b;
        (scale + lo.ln(), scale + hi.ln(), hi / lo - 1.0)
    };
    let root = |pick: fn(&(f64, f64, f64)) -> f64| {
        let (mut a, mut c) = (0.5f64, 1.0f64);
        if pick(&eval(c)) >= 0.0 {
            return c;
        }
        while c - a > opts.tol {
            let m = 0.5 * (a + c);
            if pick(&eval(m)) >= 0.0 {
                a = m;
            } else {
                c = m;
            }
        }
        c
    };
    let lo = root(|e| e.0);
    let hi = root(|e| e.1);
    let tail_ratio = eval(hi).2;
    if hi - lo > opts.max_width {
        return Err(Error::TailTooLarge(format!(
            "bracket [{lo:.6}, {hi:.6}] is wider than {}: the tail bound is {tail_ratio:.3} times the truncated sum; increase the truncation",
            opts.max_width
        )));
    }
    Ok(WangWuBracket {
        b,
        n,
        lo,
        hi,
        truncation: opts.truncation,
        tail_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_is_a_zeta_root() {
        // f_1(ρ, B) = B^{-ρ} ζ(2ρ)
        let r = wang_wu_s_n(4.0, 1, &WangWuOptions::default()).unwrap();
        let f = |rho: f64| 4f64.powf(-rho) * hurwitz_zeta(2.0 * rho, 1.0);
        assert!(r.hi - r.lo < 1e-6, "{r:?}");
        assert!(f(r.lo - 1e-6) > 1.0 && f(r.hi + 1e-6) < 1.0);
    }

    #[test]
    fn brackets_are_ordered() {
        let r = wang_wu_s_n(2.0, 3, &WangWuOptions::default()).unwrap();
        assert!(0.5 < r.lo && r.lo <= r.hi && r.hi <= 1.0, "{r:?}");
    }

    #[test]
    fn sums_decrease_in_rho() {
        let o = WangWuOptions::default();
        let pre = Prefixes::build(o.truncation, 2);
        let a = sums(&pre, 0.6, 3, &o);
        let b = sums(&pre, 0.7, 3, &o);
        for n in 1..=3 {
            assert!(b[n].0 < a[n].0 && b[n].1 < a[n].1);
        }
    }
}
