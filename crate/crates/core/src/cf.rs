//! Exact continued-fraction arithmetic.
//!
//! Words are finite digit sequences `a_1..a_n`. Continuants follow
//! `q_n = a_n q_{n-1} + q_{n-2}` with seeds `q_{-1} = 0`, `q_0 = 1`; numerators use the
//! same recursion with `p_{-1} = 1`, `p_0 = 0`, so `p_n/q_n = [a_1, .., a_n]`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A finite word of positive digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DigitWord {
    digits: Vec<BigUint>,
}

impl DigitWord {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a word, rejecting zero digits.
    pub fn new(digits: Vec<BigUint>) -> Result<Self> {
        if digits.iter().any(Zero::is_zero) {
            return Err(Error::domain("digits must be positive"));
        }
        Ok(Self { digits })
    }

    pub fn from_u64s(digits: &[u64]) -> Result<Self> {
        Self::new(digits.iter().map(|&d| BigUint::from(d)).collect())
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn concat(&self, other: &DigitWord) -> DigitWord {
        let mut digits = self.digits.clone();
        digits.extend(other.digits.iter().cloned());
        DigitWord { digits }
    }

    /// Appends one digit.
    pub fn push(&self, a: BigUint) -> Result<DigitWord> {
        if a.is_zero() {
            return Err(Error::domain("digits must be positive"));
        }
        let mut digits = self.digits.clone();
        digits.push(a);
        Ok(DigitWord { digits })
    }

    /// Sub-word `a_{start+1} .. a_{end}` (half-open, zero-based).
    pub fn slice(&self, start: usize, end: usize) -> DigitWord {
        DigitWord {
            digits: self.digits[start..end].to_vec(),
        }
    }

    /// The word with the digit at zero-based position `k` removed.
    pub fn delete(&self, k: usize) -> DigitWord {
        let mut digits = self.digits.clone();
        digits.remove(k);
        DigitWord { digits }
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Denominators and numerators of the last two convergents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuantQuad {
    pub q_prev: BigUint,
    pub q_cur: BigUint,
    pub p_prev: BigUint,
    pub p_cur: BigUint,
}

impl ContinuantQuad {
    /// State of the empty word.
    pub fn seed() -> Self {
        Self {
            q_prev: BigUint::zero(),
            q_cur: BigUint::one(),
            p_prev: BigUint::one(),
            p_cur: BigUint::zero(),
        }
    }

    /// One recursion step with digit `a`.
    pub fn extend(&self, a: &BigUint) -> Self {
        Self {
            q_prev: self.q_cur.clone(),
            q_cur: a * &self.q_cur + &self.q_prev,
            p_prev: self.p_cur.clone(),
            p_cur: a * &self.p_cur + &self.p_prev,
        }
    }
}

/// Convergent data of `w`.
pub fn continuants(w: &DigitWord) -> ContinuantQuad {
    w.digits()
        .iter()
        .fold(ContinuantQuad::seed(), |acc, a| acc.extend(a))
}

/// Shorthand for `q_n(w)`.
pub fn q_of(w: &DigitWord) -> BigUint {
    continuants(w).q_cur
}

/// Cylinder `I_n(w)`: the points whose expansion starts with `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderInterval {
    pub word: DigitWord,
    pub lo: BigRational,
    pub hi: BigRational,
    pub length: BigRational,
}

impl CylinderInterval {
    pub fn contains(&self, other: &CylinderInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn length_f64(&self) -> f64 {
        rational_to_f64(&self.length)
    }
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(num.clone().into(), den.clone().into())
}

/// Exact cylinder of `w`. The empty word gives the unit interval.
pub fn cylinder(w: &DigitWord) -> CylinderInterval {
    let c = continuants(w);
    if w.is_empty() {
        return CylinderInterval {
            word: w.clone(),
            lo: BigRational::zero(),
            hi: BigRational::one(),
            length: BigRational::one(),
        };
    }
    let a = ratio(&c.p_cur, &c.q_cur);
    let b = ratio(&(&c.p_cur + &c.p_prev), &(&c.q_cur + &c.q_prev));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let length = ratio(&BigUint::one(), &(&c.q_cur * (&c.q_cur + &c.q_prev)));
    CylinderInterval {
        word: w.clone(),
        lo,
        hi,
        length,
    }
}

/// Length of the part of `I_n(w)` whose next digit exceeds `a`, i.e. the
/// interval between `[w]` and `[w, a+1]`. Equals `1/(q_n((a+1)q_n + q_{n-1}))`.
pub fn tail_beyond(w: &DigitWord, a: &BigUint) -> BigRational {
    let c = continuants(w);
    let a1 = a + 1u32;
    ratio(&BigUint::one(), &(&c.q_cur * (&a1 * &c.q_cur + &c.q_prev)))
}

/// Input to [`gauss_expand`].
#[derive(Debug, Clone, PartialEq)]
pub enum RealInput {
    Rational(BigRational),
    Float(f64),
}

/// Result of a Gauss-map expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub word: DigitWord,
    /// The orbit reached zero (rational input) or the float residual fell below epsilon.
    pub terminated: bool,
}

/// Default residual cutoff for floating inputs.
pub const FLOAT_EPS: f64 = 1e-15;

/// First `n` digits of `x` under the Gauss map `T(x) = 1/x - floor(1/x)`.
pub fn gauss_expand(x: &RealInput, n: usize) -> Result<Expansion> {
    match x {
        RealInput::Rational(r) => gauss_expand_rational(r, n),
        RealInput::Float(f) => gauss_expand_float(*f, n, FLOAT_EPS),
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("digit count must be at least 1"));
    }
    Ok(())
}

/// Exact expansion by the Euclidean algorithm.
pub fn gauss_expand_rational(x: &BigRational, n: usize) -> Result<Expansion> {
    check_n(n)?;
    if *x <= BigRational::zero() || *x >= BigRational::one() {
        return Err(Error::domain("x must lie in (0,1)"));
    }
    let mut digits = Vec::new();
    let mut cur = x.clone();
    let mut terminated = false;
    while digits.len() < n {
        let inv = cur.recip();
        let a = inv.floor();
        digits.push(a.to_integer().to_biguint().expect("positive digit"));
        cur = inv - a;
        if cur.is_zero() {
            terminated = true;
            break;
        }
    }
    Ok(Expansion {
        word: DigitWord { digits },
        terminated,
    })
}

/// Floating expansion; stops once the residual drops below `eps`.
pub fn gauss_expand_float(x: f64, n: usize, eps: f64) -> Result<Expansion> {
    check_n(n)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("x must lie in (0,1)"));
    }
    let mut digits = Vec::new();
    let mut cur = x;
    let mut terminated = false;
    while digits.len() < n {
        let inv = 1.0 / cur;
        let a = inv.floor();
        digits.push(BigUint::from(a as u64));
        cur = inv - a;
        if cur < eps {
            terminated = true;
            break;
        }
    }
    Ok(Expansion {
        word: DigitWord { digits },
        terminated,
    })
}

/// Sum, maximum and large-digit product of a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitStats {
    pub sum: BigUint,
    pub max: BigUint,
    /// Product of the digits exceeding `e^m` (empty product is 1).
    pub large_product: BigUint,
}

/// `S_n`, `M_n` and `Π_n^{(m)}` of `w`.
pub fn orbit_stats(w: &DigitWord, m: u32) -> OrbitStats {
    let mut sum = BigUint::zero();
    let mut max = BigUint::zero();
    let mut prod = BigUint::one();
    for a in w.digits() {
        sum += a;
        if *a > max {
            max = a.clone();
        }
        if exceeds_exp(a, m) {
            prod *= a;
        }
    }
    OrbitStats {
        sum,
        max,
        large_product: prod,
    }
}

/// Whether `a > e^m`. `e^m` is irrational for `m >= 1`, so ties only occur at `m = 0`.
fn exceeds_exp(a: &BigUint, m: u32) -> bool {
    if m == 0 {
        return *a > BigUint::one();
    }
    let bits = a.bits();
    if bits < 60 {
        let v = a.to_u64().expect("fits") as f64;
        v.ln() > m as f64
    } else {
        // ln a >= (bits - 1) ln 2 and the next bit refines it well enough at this size
        let shift = bits - 53;
        let top = (a >> shift).to_u64().expect("fits") as f64;
        top.ln() + shift as f64 * std::f64::consts::LN_2 > m as f64
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers: go through logarithms of the bit lengths
        let n = r.numer().magnitude();
        let d = r.denom().magnitude();
        (big_ln(n) - big_ln(d)).exp()
    })
}

/// Natural logarithm of a positive big integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
