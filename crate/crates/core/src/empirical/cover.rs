//! Cantor covers of the sets of points with prescribed large digits, covers of `F_M`,
//! and the Falconer and covering dimension estimators built on them.
//!
//! A level is a family of basic intervals. For a word `u` followed by a digit at most
//! `H`, the basic interval is the hull `{[u + y] : 1/(H+1) <= y <= 1}`. Two sibling
//! intervals whose words first differ at digits `a < a+1` are separated by the points
//! `[v, a+1, y]` with `0 < y < 1/(H+1)`, where `H` bounds the following digit.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use super::bands::{band_counts, verify_lemma_np, LemmaMode, LemmaOptions};
use crate::cf::big_ln;
use crate::error::{Error, Result};
use crate::pressure::DigitCap;
use crate::profile::{SequenceTriple, Val};

/// Statistics of one cover level. Quantities that overflow are kept as logarithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverLevel {
    pub level: usize,
    /// Word length at this level (the largest one for stopping-time covers).
    pub depth: usize,
    /// `ln m_k`, the minimum number of children per parent.
    pub ln_children: f64,
    /// `ln ε_k`, a lower bound on the gap between sibling intervals.
    pub ln_min_gap: f64,
    /// `ln δ_k`, an upper bound on the interval diameters.
    pub ln_max_diameter: f64,
    /// `ln ♯E_k`.
    pub ln_count: f64,
    /// Exact `m_k` and `♯E_k` when they fit.
    pub children: Option<u64>,
    pub count: Option<u64>,
}

/// Choice of the words between consecutive large digits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoverScheme {
    /// Any digits in `1..=L` away from the positions `n_k`.
    Natural,
    /// Normal blocks of length `k0` whose cylinders lie in band `m0`, then ones.
    Block { k0: usize, m0: u32 },
    /// Block scheme with `(k0, m0)` taken from the first depth at which the band-count
    /// lemma holds for `θ` and `ε`.
    BlockAuto { theta: f64, eps: f64 },
}

/// `n_k - n_{k-1} - 1 = ℓ_k k0 + r_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub k0: usize,
    pub m0: u32,
    pub ell: u64,
    pub r: u64,
}

impl ConstructionParams {
    pub fn split(gap: u64, k0: usize, m0: u32) -> Self {
        Self {
            k0,
            m0,
            ell: gap / k0 as u64,
            r: gap % k0 as u64,
        }
    }
}

/// One run of positions inside a level, with bounds for any word it admits.
#[derive(Debug, Clone, Copy)]
struct Segment {
    ln_q_min: f64,
    ln_q_max: f64,
    ln_count: f64,
    /// `ln` of the largest admissible digit.
    ln_h: f64,
    /// Whether two words of the run can differ.
    branching: bool,
}

/// `ln` of the continuant of `r` copies of digit `a`.
fn ln_constant_continuant(a: f64, r: u64) -> f64 {
    // x_j = q_j / q_{j-1} satisfies x_1 = a, x_{j+1} = a + 1/x_j
    let mut x = a;
    let mut ln_q = 0.0;
    for j in 1..=r {
        ln_q += x.ln();
        if j >= 200 {
            // x has converged to machine precision
            return ln_q + (r - j) as f64 * x.ln();
        }
        x = a + 1.0 / x;
    }
    ln_q
}

/// `ln(⌊s+t⌋ - ⌊s⌋)` with its provenance, or a degeneracy error.
fn ln_choices(s: &Val, t: &Val, k: usize) -> Result<f64> {
    let sf = s.to_f64();
    let tf = t.to_f64();
    if sf.is_finite() && (sf + tf) < 4.5e15 && tf.is_finite() {
        let d = (sf + tf).floor() - sf.floor();
        if d < 2.0 {
            return Err(Error::Degenerate(format!(
                "level {k}: floor(s+t) - floor(s) = {d} < 2"
            )));
        }
        return Ok(d.ln());
    }
    // s is beyond exact float range: the count lies in [t - 1, t + 1]
    let lt = t.ln_abs();
    if !(lt > 4.0_f64.ln()) {
        return Err(Error::Degenerate(format!(
            "level {k}: t_k too small to resolve next to s_k"
        )));
    }
    Ok(lt + (-(-lt).exp()).ln_1p())
}

fn sum_ln(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Band vocabulary of the block scheme.
struct Vocabulary {
    ln_count: f64,
    ln_q_min: f64,
    ln_q_max: f64,
    ln_h: f64,
}

fn block_vocabulary(k0: usize, m0: u32) -> Result<Vocabulary> {
    let table = band_counts(k0, m0, DigitCap::Unbounded, 50_000_000)?;
    let n = table.get(m0);
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "band {m0} at length {k0} holds {n} words; need at least 2"
        )));
    }
    // 2^{m0-1} < q(q+q') <= 2^{m0} and q^2 < q(q+q') <= 2 q^2
    Ok(Vocabulary {
        ln_count: (n as f64).ln(),
        ln_q_min: 0.5 * (m0 as f64 - 2.0) * LN_2,
        ln_q_max: 0.5 * m0 as f64 * LN_2,
        ln_h: 0.5 * m0 as f64 * LN_2,
    })
}

fn discover_block(theta: f64, eps: f64) -> Result<(usize, u32)> {
    let opts = LemmaOptions::default();
    for k0 in 1..=8 {
        let r = verify_lemma_np(theta, eps, k0, LemmaMode::Full, &opts)?;
        if let Some(m) = r.found_m {
            return Ok((k0, m));
        }
    }
    Err(Error::Degenerate(
        "no (k0, m0) satisfies the band-count lemma up to k0 = 8; pass them explicitly".into(),
    ))
}

/// Levels `1..=levels` of the cover built on the positions `n_k` of `t`, with
/// digits at most `digit_bound` elsewhere.
///
/// Counts are exact in the log domain; gaps and diameters are certified bounds from
/// `q(u)q(v) <= q(uv) <= 2q(u)q(v)`.
pub fn build_cover(t: &SequenceTriple, digit_bound: u64, levels: usize, scheme: CoverScheme) -> Result<Vec<CoverLevel>> {
    if levels == 0 {
        return Err(Error::domain("levels must be at least 1"));
    }
    if digit_bound == 0 {
        return Err(Error::domain("digit bound must be at least 1"));
    }
    let vocab = match scheme {
        CoverScheme::Natural => None,
        CoverScheme::Block { k0, m0 } => {
            if k0 == 0 {
                return Err(Error::domain("k0 must be at least 1"));
            }
            Some((k0, block_vocabulary(k0, m0)?))
        }
        CoverScheme::BlockAuto { theta, eps } => {
            let (k0, m0) = discover_block(theta, eps)?;
            Some((k0, block_vocabulary(k0, m0)?))
        }
    };
    let terms = t.evaluate(levels + 1)?;
    let mut ns = Vec::with_capacity(levels + 1);
    for (k, (n, _, _)) in terms.iter().enumerate() {
        let nf = n.to_f64();
        if !(nf >= 1.0) || nf.fract() != 0.0 || nf > 1e15 {
            return Err(Error::domain(format!("n_{} = {nf} is not a usable position", k + 1)));
        }
        if let Some(&prev) = ns.last() {
            if nf as u64 <= prev {
                return Err(Error::domain("positions n_k must increase strictly"));
            }
        }
        ns.push(nf as u64);
    }
    let lb = digit_bound as f64;
    let segments_of = |k: usize| -> Result<Vec<Segment>> {
        let prev = if k == 0 { 0 } else { ns[k - 1] };
        let gap = ns[k] - prev - 1;
        let (_, s, tt) = &terms[k];
        let ln_d = ln_choices(s, tt, k + 1)?;
        let mut segs = Vec::new();
        match &vocab {
            None => {
                if gap > 0 {
                    segs.push(Segment {
                        ln_q_min: ln_constant_continuant(1.0, gap),
                        ln_q_max: ln_constant_continuant(lb, gap),
                        ln_count: gap as f64 * lb.ln(),
                        ln_h: lb.ln(),
                        branching: digit_bound >= 2,
                    });
                }
            }
            Some((k0, v)) => {
                let p = ConstructionParams::split(gap, *k0, 0);
                if p.ell > 0 {
                    // ℓ normal blocks merged into one run
                    let ell = p.ell as f64;
                    segs.push(Segment {
                        ln_q_min: ell * v.ln_q_min,
                        ln_q_max: ell * (v.ln_q_max + LN_2),
                        ln_count: ell * v.ln_count,
                        ln_h: v.ln_h,
                        branching: true,
                    });
                }
                if p.r > 0 {
                    let lq = ln_constant_continuant(1.0, p.r);
                    segs.push(Segment {
                        ln_q_min: lq,
                        ln_q_max: lq,
                        ln_count: 0.0,
                        ln_h: 0.0,
                        branching: false,
                    });
                }
            }
        }
        let s_lo = s.ln_abs().max(0.0);
        let top = s.add(tt).add(&Val::from_f64(1.0));
        segs.push(Segment {
            ln_q_min: s_lo,
            ln_q_max: top.ln_abs(),
            ln_count: ln_d,
            ln_h: s.add(tt).ln_abs(),
            branching: true,
        });
        Ok(segs)
    };
    let all: Vec<Vec<Segment>> = (0..levels).map(&segments_of).collect::<Result<_>>()?;
    // a degenerate level past the last one only loosens the final gap bound
    let next_h = segments_of(levels).map(|s| s[0].ln_h).unwrap_or(f64::INFINITY);
    let mut out = Vec::with_capacity(levels);
    let (mut ln_q_min, mut ln_q_max, mut ln_count) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..levels {
        let segs = &all[k];
        let first_next_h = if k + 1 < levels { all[k + 1][0].ln_h } else { next_h };
        let mut ln_children = 0.0;
        let mut ln_h = first_next_h;
        for s in segs {
            ln_q_min += s.ln_q_min;
            ln_q_max += s.ln_q_max + LN_2;
            ln_children += s.ln_count;
            if s.branching {
                ln_h = ln_h.max(s.ln_h);
            }
        }
        ln_count += ln_children;
        // the separating points [v, a+1, y] with y < 1/(H+1) have length >= 1/((H+2) q^2)
        let ln_gap = -sum_ln(ln_h, 2f64.ln()) - 2.0 * ln_q_max;
        out.push(CoverLevel {
            level: k + 1,
            depth: ns[k] as usize,
            ln_children,
            ln_min_gap: ln_gap,
            ln_max_diameter: -2.0 * ln_q_min,
            ln_count,
            children: exact_count(ln_children),
            count: exact_count(ln_count),
        });
    }
    Ok(out)
}

fn exact_count(ln: f64) -> Option<u64> {
    (ln < 40.0).then(|| ln.exp().round() as u64)
}

/// Word with continuants, used by the exact `F_M` covers.
#[derive(Debug, Clone)]
struct Node {
    q: BigUint,
    q_prev: BigUint,
    p: BigUint,
    p_prev: BigUint,
    len: usize,
}

impl Node {
    fn root() -> Self {
        Node {
            q: BigUint::one(),
            q_prev: BigUint::zero(),
            p: BigUint::zero(),
            p_prev: BigUint::one(),
            len: 0,
        }
    }

    fn child(&self, a: u64) -> Self {
        Node {
            q: &self.q * a + &self.q_prev,
            q_prev: self.q.clone(),
            p: &self.p * a + &self.p_prev,
            p_prev: self.p.clone(),
            len: self.len + 1,
        }
    }

    /// `1/|I(u)| = q(q+q')`.
    fn inv_len(&self) -> BigUint {
        &self.q * (&self.q + &self.q_prev)
    }

    /// `[u + y]` for rational `y = num/den`.
    fn point(&self, num: u64, den: u64) -> BigRational {
        let n = BigInt::from(&self.p * den + &self.p_prev * num);
        let d = BigInt::from(&self.q * den + &self.q_prev * num);
        BigRational::new(n, d)
    }

    /// Hull of the points of `F_M` inside `I(u)`.
    fn basic_interval(&self, m: u64) -> (BigRational, BigRational) {
        let a = self.point(1, m + 1);
        let b = self.point(1, 1);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

fn ln_rational(r: &BigRational) -> f64 {
    big_ln(r.numer().magnitude()) - big_ln(r.denom().magnitude())
}

/// Level statistics from parent-grouped children.
fn exact_level(level: usize, m: u64, groups: &[Vec<Node>]) -> CoverLevel {
    let mut min_children = u64::MAX;
    let mut count = 0u64;
    let mut min_gap: Option<BigRational> = None;
    let mut min_inv: Option<BigUint> = None;
    let mut depth = 0;
    for g in groups {
        min_children = min_children.min(g.len() as u64);
        count += g.len() as u64;
        let mut iv: Vec<(BigRational, BigRational)> = g.iter().map(|n| n.basic_interval(m)).collect();
        iv.sort_by(|a, b| a.0.cmp(&b.0));
        for w in iv.windows(2) {
            let gap = &w[1].0 - &w[0].1;
            if min_gap.as_ref().is_none_or(|mg| &gap < mg) {
                min_gap = Some(gap);
            }
        }
        for n in g {
            depth = depth.max(n.len);
            let inv = n.inv_len();
            if min_inv.as_ref().is_none_or(|mi| &inv < mi) {
                min_inv = Some(inv);
            }
        }
    }
    let ln_min_gap = match &min_gap {
        Some(g) if g.is_positive() => ln_rational(g),
        Some(_) => f64::NEG_INFINITY,
        None => f64::INFINITY,
    };
    CoverLevel {
        level,
        depth,
        ln_children: (min_children as f64).ln(),
        ln_min_gap,
        ln_max_diameter: -big_ln(&min_inv.expect("nonempty level")),
        ln_count: (count as f64).ln(),
        children: Some(min_children),
        count: Some(count),
    }
}

fn check_fm(m: u64, depth: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::domain("F_M covers need M >= 2"));
    }
    let words = (m as f64).powi(depth as i32);
    if words > 5e6 {
        return Err(Error::Budget(format!("{words:.3e} words exceed the cover budget of 5e6")));
    }
    Ok(())
}

/// Natural cover of `F_M`: level `k` holds every word of length `k` over `1..=M`.
/// Gaps and diameters are exact.
pub fn fm_cover(m: u64, depth: usize) -> Result<Vec<CoverLevel>> {
    check_fm(m, depth)?;
    let mut out = Vec::with_capacity(depth);
    let mut frontier = vec![Node::root()];
    for k in 1..=depth {
        let groups: Vec<Vec<Node>> = frontier
            .iter()
            .map(|p| (1..=m).map(|a| p.child(a)).collect())
            .collect();
        out.push(exact_level(k, m, &groups));
        frontier = groups.into_iter().flatten().collect();
    }
    Ok(out)
}

/// Stopping-time cover of `F_M` from words of length at most `depth`: level `j` holds
/// the words whose cylinder first has length at most `2^{-j}`. Levels stop at the
/// finest scale the depth resolves.
pub fn fm_stopping_cover(m: u64, depth: usize) -> Result<Vec<CoverLevel>> {
    check_fm(m, depth)?;
    // the all-ones word has the longest cylinder at each length
    let mut ones = Node::root();
    for _ in 0..depth {
        ones = ones.child(1);
    }
    let j_max = (big_ln(&ones.inv_len()) / LN_2).floor() as usize;
    if j_max == 0 {
        return Err(Error::domain("depth too small for any dyadic scale"));
    }
    let mut out = Vec::with_capacity(j_max);
    let mut frontier = vec![Node::root()];
    for j in 1..=j_max {
        let bound = BigUint::one() << j;
        let groups: Vec<Vec<Node>> = frontier
            .iter()
            .map(|p| {
                let mut kids = Vec::new();
                let mut stack = vec![p.clone()];
                while let Some(n) = stack.pop() {
                    if n.inv_len() >= bound {
                        kids.push(n);
                    } else {
                        stack.extend((1..=m).rev().map(|a| n.child(a)));
                    }
                }
                kids
            })
            .collect();
        out.push(exact_level(j, m, &groups));
        frontier = groups.into_iter().flatten().collect();
    }
    Ok(out)
}

/// Per-level estimates with a windowed running liminf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTrace {
    /// `(level, value)`.
    pub values: Vec<(usize, f64)>,
    /// `min` of the values over levels `⌈k/2⌉..=k`.
    pub running_liminf: Vec<f64>,
    /// Value at the last level.
    pub final_value: f64,
    pub warnings: Vec<String>,
}

fn windowed_min(values: &[(usize, f64)]) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            values[i / 2..=i]
                .iter()
                .map(|v| v.1)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// `ln(m_1⋯m_{k-1}) / -ln(m_k ε_k)` for `k >= 2`.
pub fn falconer_estimate(levels: &[CoverLevel]) -> Result<EstimateTrace> {
    if levels.len() < 2 {
        return Err(Error::Precondition("the Falconer estimate needs at least two levels".into()));
    }
    for (i, l) in levels.iter().enumerate() {
        if l.ln_children < 2f64.ln() - 1e-12 {
            return Err(Error::Precondition(format!(
                "level {}: m_k = {:.3} < 2",
                l.level,
                l.ln_children.exp()
            )));
        }
        if !l.ln_min_gap.is_finite() {
            return Err(Error::Precondition(format!("level {}: no positive gap", l.level)));
        }
        if i > 0 && !(l.ln_min_gap < levels[i - 1].ln_min_gap) {
            return Err(Error::Precondition(format!(
                "gaps must decrease strictly (level {})",
                l.level
            )));
        }
    }
    let mut values = Vec::with_capacity(levels.len() - 1);
    let mut acc = levels[0].ln_children;
    for l in &levels[1..] {
        let den = -(l.ln_children + l.ln_min_gap);
        if !(den > 0.0) {
            return Err(Error::Precondition(format!("level {}: m_k ε_k >= 1", l.level)));
        }
        values.push((l.level, acc / den));
        acc += l.ln_children;
    }
    let running_liminf = windowed_min(&values);
    Ok(EstimateTrace {
        final_value: values.last().expect("two levels").1,
        values,
        running_liminf,
        warnings: Vec::new(),
    })
}

/// `ln ♯E_k / -ln δ_k`.
pub fn covering_estimate(levels: &[CoverLevel]) -> Result<EstimateTrace> {
    if levels.is_empty() {
        return Err(Error::Precondition("no cover levels".into()));
    }
    let mut warnings = Vec::new();
    let mut values = Vec::with_capacity(levels.len());
    for (i, l) in levels.iter().enumerate() {
        if i > 0 && !(l.ln_max_diameter < levels[i - 1].ln_max_diameter) {
            warnings.push(format!("diameter does not shrink at level {}", l.level));
        }
        if !(l.ln_max_diameter < 0.0) {
            warnings.push(format!("diameter >= 1 at level {}; value skipped", l.level));
            continue;
        }
        values.push((l.level, l.ln_count / -l.ln_max_diameter));
    }
    if values.is_empty() {
        return Err(Error::Precondition("no level has diameter below 1".into()));
    }
    let running_liminf = windowed_min(&values);
    Ok(EstimateTrace {
        final_value: values.last().expect("nonempty").1,
        values,
        running_liminf,
        warnings,
    })
}

/// Exact sibling gaps of a natural `F_M` level, for cross-checks of the gap bound.
pub fn fm_sibling_gaps(m: u64, word: &[u64]) -> Vec<f64> {
    let mut n = Node::root();
    for &a in word {
        n = n.child(a);
    }
    let mut iv: Vec<_> = (1..=m).map(|a| n.child(a).basic_interval(m)).collect();
    iv.sort_by(|a, b| a.0.cmp(&b.0));
    iv.windows(2)
        .map(|w| (&w[1].0 - &w[0].1).to_f64().unwrap_or(0.0))
        .collect()
}
