//! Extended-real limits read off finite traces.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A limit in `[0, ∞]`, or one that could not be classified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ExtReal {
    Zero,
    Finite(f64),
    Infinite,
    Unknown,
}

impl ExtReal {
    /// `1/(a + x)` with `1/∞ = 0`.
    pub fn inv_shift(self, a: f64) -> Option<f64> {
        match self {
            ExtReal::Zero => Some(1.0 / a),
            ExtReal::Finite(x) => Some(1.0 / (a + x)),
            ExtReal::Infinite => Some(0.0),
            ExtReal::Unknown => None,
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        match self {
            ExtReal::Zero => Some(0.0),
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => Some(f64::INFINITY),
            ExtReal::Unknown => None,
        }
    }

    /// Maps a limit of `ln y` (floor 0 means `y → 1`) back to `y`.
    pub fn exp_of(self) -> ExtReal {
        match self {
            ExtReal::Zero => ExtReal::Finite(1.0),
            ExtReal::Finite(x) => ExtReal::Finite(x.exp()),
            other => other,
        }
    }

    pub fn from_f64(x: f64) -> ExtReal {
        if x == 0.0 {
            ExtReal::Zero
        } else if x.is_infinite() && x > 0.0 {
            ExtReal::Infinite
        } else if x.is_finite() && x > 0.0 {
            ExtReal::Finite(x)
        } else {
            ExtReal::Unknown
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Zero => write!(f, "0"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
            ExtReal::Unknown => write!(f, "unknown"),
        }
    }
}

/// Thresholds for trend classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRules {
    /// Below this, with a decreasing tail, the limit is 0.
    pub zero_floor: f64,
    /// Above this, with an increasing tail, the limit is ∞.
    pub inf_ceiling: f64,
    /// Minimum |d ln y / d ln x| of a monotone tail to call it 0 or ∞.
    pub slope: f64,
    /// Relative spread of the last quarter accepted as convergence.
    pub cauchy_rel: f64,
}

impl Default for LimitRules {
    fn default() -> Self {
        Self {
            zero_floor: 1e-6,
            inf_ceiling: 1e6,
            slope: 0.05,
            cauchy_rel: 1e-2,
        }
    }
}

/// A classified limit and the evidence for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: ExtReal,
    pub converged: bool,
    /// `ln y` at the end of the classified range.
    pub last_ln: f64,
    /// Log-log slope over the second half of the range.
    pub slope: f64,
}

impl LimitEstimate {
    pub fn overridden(value: ExtReal) -> Self {
        Self {
            value,
            converged: true,
            last_ln: value.as_f64().map(f64::ln).unwrap_or(f64::NAN),
            slope: f64::NAN,
        }
    }

    /// The same estimate for `e^y` when the trace held `ln y` values of `y ≥ 0`.
    pub fn exp_of(self) -> Self {
        Self {
            value: self.value.exp_of(),
            ..self
        }
    }
}

fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Classifies `lim y` from `ln y` sampled at points with `ln x` values `lx`.
///
/// `ly` may hold `-inf` (y = 0) and `+inf` (overflowed y).
pub fn classify_ln_trace(lx: &[f64], ly: &[f64], rules: &LimitRules) -> LimitEstimate {
    let n = ly.len();
    let unknown = |last: f64| LimitEstimate {
        value: ExtReal::Unknown,
        converged: false,
        last_ln: last,
        slope: f64::NAN,
    };
    if n < 4 || lx.len() != n {
        return unknown(ly.last().copied().unwrap_or(f64::NAN));
    }
    let half = &ly[n / 2..];
    let hx = &lx[n / 2..];
    let quarter = &ly[n - n / 4..];
    let last = ly[n - 1];
    if half.iter().any(|v| v.is_nan()) {
        return unknown(last);
    }
    if half.iter().all(|v| *v == f64::NEG_INFINITY) {
        return LimitEstimate {
            value: ExtReal::Zero,
            converged: true,
            last_ln: last,
            slope: f64::NAN,
        };
    }
    if quarter.iter().all(|v| *v == f64::INFINITY) {
        return LimitEstimate {
            value: ExtReal::Infinite,
            converged: true,
            last_ln: last,
            slope: f64::NAN,
        };
    }
    let finite_half = half.iter().all(|v| v.is_finite());
    let slope = if finite_half {
        regression_slope(hx, half)
    } else {
        f64::NAN
    };
    let eps = 1e-12;
    let nonincreasing = half.windows(2).all(|w| w[1] <= w[0] + eps * w[0].abs().max(1.0));
    let nondecreasing = half.windows(2).all(|w| w[1] >= w[0] - eps * w[0].abs().max(1.0));
    let q_first = quarter[0];
    let est = |value, converged| LimitEstimate {
        value,
        converged,
        last_ln: last,
        slope,
    };
    if last < rules.zero_floor.ln() && last < q_first {
        return est(ExtReal::Zero, true);
    }
    if last > rules.inf_ceiling.ln() && last > q_first {
        return est(ExtReal::Infinite, true);
    }
    if finite_half {
        let qv: Vec<f64> = quarter.iter().map(|l| l.exp()).collect();
        let hi = qv.iter().cloned().fold(f64::MIN, f64::max);
        let lo = qv.iter().cloned().fold(f64::MAX, f64::min);
        if hi > 0.0 && (hi - lo) / hi <= rules.cauchy_rel {
            return est(ExtReal::Finite(last.exp()), true);
        }
        if nonincreasing && slope <= -rules.slope {
            return est(ExtReal::Zero, true);
        }
        if nondecreasing && slope >= rules.slope {
            return est(ExtReal::Infinite, true);
        }
        return est(ExtReal::Finite(last.exp()), false);
    }
    est(ExtReal::Unknown, false)
}

/// `max y_j` over the forward window `j ∈ [i, i + N/4]`, for `i` in the first three quarters.
pub fn upper_envelope(ly: &[f64]) -> Vec<f64> {
    envelope(ly, f64::max)
}

/// `min y_j` over the forward window `j ∈ [i, i + N/4]`, for `i` in the first three quarters.
pub fn lower_envelope(ly: &[f64]) -> Vec<f64> {
    envelope(ly, f64::min)
}

fn envelope(ly: &[f64], pick: fn(f64, f64) -> f64) -> Vec<f64> {
    let n = ly.len();
    let w = n / 4;
    (0..n - w)
        .map(|i| ly[i..=i + w].iter().copied().fold(ly[i], pick))
        .collect()
}

/// Classifies `limsup y` via the upper envelope of `ln y`.
pub fn classify_limsup(lx: &[f64], ly: &[f64], rules: &LimitRules) -> LimitEstimate {
    let env = upper_envelope(ly);
    classify_ln_trace(&lx[..env.len()], &env, rules)
}

/// Classifies `liminf y` via the lower envelope of `ln y`.
pub fn classify_liminf(lx: &[f64], ly: &[f64], rules: &LimitRules) -> LimitEstimate {
    let env = lower_envelope(ly);
    classify_ln_trace(&lx[..env.len()], &env, rules)
}
