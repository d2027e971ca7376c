//! Dyadic band counts of cylinder lengths and the band-count lemmas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::pressure::{pressure_refine, pressure_restricted, DigitCap, Method, PressureConfig, PressureQuery, RefineBudget};

/// Largest supported band index; keeps `q(q+q')` inside `u128`.
pub const MAX_BAND: u32 = 120;

/// `table[m]` = number of depth-`k` words with `2^{-m} <= |I_k| < 2^{-(m-1)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicBandCount {
    pub k: usize,
    pub digit_cap: DigitCap,
    pub m_max: u32,
    /// Nonzero bands only.
    pub table: BTreeMap<u32, u64>,
    pub nodes: u64,
}

impl DyadicBandCount {
    pub fn get(&self, m: u32) -> u64 {
        self.table.get(&m).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.table.values().sum()
    }
}

/// Band of a cylinder with `1/|I| = d`: the `m` with `2^{m-1} < d <= 2^m`.
pub fn band_of(d: u128) -> u32 {
    debug_assert!(d >= 2);
    128 - (d - 1).leading_zeros()
}

struct Walker {
    k: usize,
    cap: u64,
    m_max: u32,
    limit: u128,
    node_cap: u64,
    nodes: AtomicU64,
}

impl Walker {
    /// `1/|I|` after appending digit `a` to a word with continuants `(q, qp)`.
    fn d_after(q: u128, qp: u128, a: u128) -> Option<u128> {
        let qn = a.checked_mul(q)?.checked_add(qp)?;
        qn.checked_mul(qn.checked_add(q)?)
    }

    /// Largest digit `a <= cap` whose child has `1/|I| <= bound`, or 0.
    fn max_digit(&self, q: u128, qp: u128, bound: u128) -> u128 {
        let ok = |a: u128| Self::d_after(q, qp, a).is_some_and(|d| d <= bound);
        if !ok(1) {
            return 0;
        }
        // (a q)^2 <= d, so a <= sqrt(bound)/q
        let mut hi = ((bound as f64).sqrt() / q as f64).ceil() as u128 + 2;
        hi = hi.min(self.cap as u128);
        let mut lo = 1u128;
        if ok(hi) {
            return hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn tick(&self) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.node_cap {
            return Err(Error::Budget(format!(
                "band enumeration exceeded the node cap {}",
                self.node_cap
            )));
        }
        Ok(())
    }

    /// Counts the leaves under a word of length `len` with continuants `(q, qp)`.
    fn walk(&self, len: usize, q: u128, qp: u128, table: &mut [u64]) -> Result<()> {
        self.tick()?;
        if len + 1 == self.k {
            // last digit: count per band by inverting the monotone map a -> 1/|I|
            let Some(d1) = Self::d_after(q, qp, 1) else {
                return Ok(());
            };
            let mut prev = 0u128;
            for m in band_of(d1)..=self.m_max {
                let a = self.max_digit(q, qp, 1u128 << m);
                if a > prev {
                    table[m as usize] += (a - prev) as u64;
                    prev = a;
                }
                if prev >= self.cap as u128 {
                    break;
                }
            }
            return Ok(());
        }
        let amax = self.max_digit(q, qp, self.limit);
        for a in 1..=amax {
            self.walk(len + 1, a * q + qp, q, table)?;
        }
        Ok(())
    }
}

/// Exact band table `N_m(k)` (unbounded) or `M_m(k)` (digits `<= M`) for `m <= m_max`.
///
/// Prefixes are pruned once `q(q+q') > 2^{m_max}`; the last digit is counted per band in
/// closed form. Errors with [`Error::Budget`] past `node_cap` visited prefixes.
pub fn band_counts(k: usize, m_max: u32, digit_cap: DigitCap, node_cap: u64) -> Result<DyadicBandCount> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if m_max == 0 || m_max > MAX_BAND {
        return Err(Error::domain(format!("m_max must lie in 1..={MAX_BAND}")));
    }
    let cap = match digit_cap {
        DigitCap::Bounded(0) => return Err(Error::domain("digit cap must be at least 1")),
        DigitCap::Bounded(m) => m,
        DigitCap::Unbounded => u64::MAX,
    };
    let w = Walker {
        k,
        cap,
        m_max,
        limit: 1u128 << m_max,
        node_cap,
        nodes: AtomicU64::new(0),
    };
    let width = m_max as usize + 1;
    let table = if k == 1 {
        let mut t = vec![0u64; width];
        w.walk(0, 1, 0, &mut t)?;
        t
    } else {
        let first = w.max_digit(1, 0, w.limit);
        (1..=first).into_par_iter().try_fold(
            || vec![0u64; width],
            |mut t, a| {
                w.walk(1, a, 1, &mut t)?;
                Ok::<_, Error>(t)
            },
        )
        .try_reduce(
            || vec![0u64; width],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?
    };
    Ok(DyadicBandCount {
        k,
        digit_cap,
        m_max,
        table: table
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(m, c)| (m as u32, c))
            .collect(),
        nodes: w.nodes.into_inner(),
    })
}

/// Alphabet for [`verify_lemma_np`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaMode {
    /// `N_m(k) > 2^{(m+1)θ} e^{(P(θ)-ε)k}`
    Full,
    /// `M_m(k) > 2^{(m+1)θ}`
    Restricted(u64),
}

/// Outcome of the band-count lemma check at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaNpReport {
    pub theta: f64,
    pub eps: f64,
    pub k: usize,
    pub mode: LemmaMode,
    /// Enclosure of the pressure used in the threshold (full mode).
    pub pressure: Option<(f64, f64)>,
    pub found_m: Option<u32>,
    /// Band with the largest `ln count - ln threshold`, and that margin.
    pub best_margin: Option<(u32, f64)>,
    pub m_searched: u32,
}

/// Options for [`verify_lemma_np`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaOptions {
    pub node_cap: u64,
    /// Largest band searched in full mode.
    pub m_limit: u32,
    pub pressure_tol: f64,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        Self {
            node_cap: 200_000_000,
            m_limit: 64,
            pressure_tol: 0.02,
        }
    }
}

/// Smallest `m` meeting the band-count inequality at depth `k`.
///
/// Full mode uses the upper end of a certified bracket of `P(θ)`, so a reported `m`
/// satisfies the inequality for the true pressure.
pub fn verify_lemma_np(theta: f64, eps: f64, k: usize, mode: LemmaMode, opts: &LemmaOptions) -> Result<LemmaNpReport> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let (cap, pressure, offset, m_max) = match mode {
        LemmaMode::Full => {
            if !(theta > 0.5 && theta < 1.0) {
                return Err(Error::domain("full mode needs 1/2 < theta < 1"));
            }
            let b = pressure_refine(theta, opts.pressure_tol, &RefineBudget::default())?;
            if !(eps > 0.0 && eps < b.lower) {
                return Err(Error::domain(format!(
                    "eps must lie in (0, {:.6}), the certified lower end of P(theta)",
                    b.lower
                )));
            }
            (DigitCap::Unbounded, Some((b.lower, b.upper)), (b.upper - eps) * k as f64, opts.m_limit)
        }
        LemmaMode::Restricted(m) => {
            if m < 1 {
                return Err(Error::domain("M must be at least 1"));
            }
            if !(theta > 0.0) {
                return Err(Error::domain("theta must be positive"));
            }
            // every word of length k has 1/|I| <= that of the all-M word
            let (mut q, mut qp) = (1u128, 0u128);
            for _ in 0..k {
                let nq = (m as u128)
                    .checked_mul(q)
                    .and_then(|x| x.checked_add(qp))
                    .ok_or_else(|| Error::domain("depth too large for exact bands"))?;
                qp = q;
                q = nq;
            }
            let d = q.checked_mul(q + qp).ok_or_else(|| Error::domain("depth too large for exact bands"))?;
            (DigitCap::Bounded(m), None, 0.0, band_of(d).max(1))
        }
    };
    if m_max > MAX_BAND {
        return Err(Error::domain("depth too large for exact bands"));
    }
    let table = band_counts(k, m_max, cap, opts.node_cap)?;
    let mut found_m = None;
    let mut best: Option<(u32, f64)> = None;
    for m in 1..=m_max {
        let c = table.get(m);
        let margin = if c == 0 {
            f64::NEG_INFINITY
        } else {
            (c as f64).ln() - ((m + 1) as f64 * theta * LN_2 + offset)
        };
        if best.is_none_or(|(_, b)| margin > b) {
            best = Some((m, margin));
        }
        if margin > 0.0 && found_m.is_none() {
            found_m = Some(m);
        }
    }
    Ok(LemmaNpReport {
        theta,
        eps,
        k,
        mode,
        pressure,
        found_m,
        best_margin: best,
        m_searched: m_max,
    })
}

/// Bracket of `P_M(θ)` used by the restricted-mode consistency check.
pub fn restricted_pressure_at(theta: f64, m: u64, depth: usize) -> Result<(f64, f64)> {
    let b = pressure_restricted(
        &PressureQuery {
            theta,
            cap: DigitCap::Bounded(m),
            depth,
            method: Method::Auto,
        },
        &PressureConfig::default(),
    )?;
    Ok((b.lower, b.upper))
}
