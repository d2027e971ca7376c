//! Real numbers that may be towers like `exp(e^{k²})`.
//!
//! Moderate values are plain floats. Larger or smaller ones are kept as `sign·e^{L}`,
//! where `L` itself moves one level up (`L = e^{ll}`) once it overflows.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// `ln|x|` as a float or as `exp(ll)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LnMag {
    Small(f64),
    Huge(f64),
}

const LN_HUGE: f64 = 1e300;
/// Values with `|ln|x|| < LN_PLAIN` are stored as plain floats.
const LN_PLAIN: f64 = 700.0;

impl LnMag {
    fn norm(self) -> Self {
        match self {
            LnMag::Small(l) if l > LN_HUGE => LnMag::Huge(l.ln()),
            LnMag::Huge(ll) if ll < LN_HUGE.ln() => LnMag::Small(ll.exp()),
            other => other,
        }
    }

    /// `ln|x|` as a float; `+inf` past the float range.
    pub fn as_f64(self) -> f64 {
        match self {
            LnMag::Small(l) => l,
            LnMag::Huge(ll) => ll.exp(),
        }
    }

    fn cmp(self, o: LnMag) -> Ordering {
        use LnMag::*;
        match (self, o) {
            (Small(x), Small(y)) | (Huge(x), Huge(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
            (Huge(_), Small(_)) => Ordering::Greater,
            (Small(_), Huge(_)) => Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Val {
    Plain(f64),
    /// `sign · e^{ln}` with `sign = ±1`.
    Log { sign: i8, ln: LnMag },
}

impl Val {
    pub const ZERO: Val = Val::Plain(0.0);

    pub fn from_f64(x: f64) -> Val {
        if x.is_infinite() {
            return Val::Log {
                sign: if x > 0.0 { 1 } else { -1 },
                ln: LnMag::Huge(f64::INFINITY),
            };
        }
        Val::Plain(x)
    }

    fn from_sign_ln(sign: i8, ln: LnMag) -> Val {
        let ln = ln.norm();
        match ln {
            LnMag::Small(l) if l == f64::NEG_INFINITY || sign == 0 => Val::ZERO,
            LnMag::Small(l) if l.abs() < LN_PLAIN => Val::Plain(sign as f64 * l.exp()),
            _ => Val::Log { sign, ln },
        }
    }

    /// Positive number `e^l`.
    pub fn from_ln(l: f64) -> Val {
        Val::from_sign_ln(1, LnMag::Small(l))
    }

    pub fn sign(&self) -> i8 {
        match *self {
            Val::Plain(x) if x > 0.0 => 1,
            Val::Plain(x) if x < 0.0 => -1,
            Val::Plain(_) => 0,
            Val::Log { sign, .. } => sign,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    fn lnmag(&self) -> LnMag {
        match *self {
            Val::Plain(x) => LnMag::Small(x.abs().ln()),
            Val::Log { ln, .. } => ln,
        }
    }

    /// Nearest float, saturating to `±inf` or `0`.
    pub fn to_f64(&self) -> f64 {
        match *self {
            Val::Plain(x) => x,
            Val::Log { sign, ln } => sign as f64 * ln.as_f64().exp(),
        }
    }

    /// `ln|x|` as a float.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.lnmag().as_f64()
    }

    /// `ln x`; `None` for `x <= 0`.
    pub fn ln_val(&self) -> Option<Val> {
        if !self.is_positive() {
            return None;
        }
        Some(match self.lnmag() {
            LnMag::Small(l) => Val::Plain(l),
            LnMag::Huge(ll) => Val::from_ln(ll),
        })
    }

    /// `ln ln x` for `x > 1`.
    pub fn lnln(&self) -> Option<f64> {
        let l = self.ln_val()?;
        if !l.is_positive() {
            return None;
        }
        Some(l.ln_abs())
    }

    pub fn exp(&self) -> Val {
        match *self {
            Val::Plain(x) => Val::from_sign_ln(1, LnMag::Small(x)),
            Val::Log { sign: 1, ln } => match ln {
                LnMag::Small(l) => Val::from_sign_ln(1, LnMag::Huge(l)),
                LnMag::Huge(_) => Val::from_f64(f64::INFINITY),
            },
            // e^{-huge}
            Val::Log { .. } => Val::ZERO,
        }
    }

    pub fn neg(&self) -> Val {
        match *self {
            Val::Plain(x) => Val::Plain(-x),
            Val::Log { sign, ln } => Val::Log { sign: -sign, ln },
        }
    }

    pub fn mul(&self, o: &Val) -> Val {
        if let (Val::Plain(x), Val::Plain(y)) = (self, o) {
            let p = x * y;
            if p.is_finite() && (p.abs() > 1e-290 || *x == 0.0 || *y == 0.0) {
                return Val::Plain(p);
            }
        }
        let s = self.sign() * o.sign();
        if s == 0 {
            return Val::ZERO;
        }
        Val::from_sign_ln(s, ln_sum(self.lnmag(), o.lnmag()))
    }

    pub fn recip(&self) -> Val {
        match *self {
            Val::Plain(x) if x != 0.0 && x.abs() > 1e-300 && x.abs() < 1e300 => Val::Plain(1.0 / x),
            _ => match self.lnmag() {
                _ if self.is_zero() => Val::from_f64(f64::INFINITY),
                LnMag::Small(l) => Val::from_sign_ln(self.sign(), LnMag::Small(-l)),
                // ln of the reciprocal is -e^{ll}, below any float
                LnMag::Huge(_) => Val::ZERO,
            },
        }
    }

    pub fn div(&self, o: &Val) -> Val {
        if let (Val::Plain(x), Val::Plain(y)) = (self, o) {
            let q = x / y;
            if q.is_finite() && (q.abs() > 1e-290 || *x == 0.0) {
                return Val::Plain(q);
            }
        }
        self.mul(&o.recip())
    }

    pub fn add(&self, o: &Val) -> Val {
        if let (Val::Plain(x), Val::Plain(y)) = (self, o) {
            let s = x + y;
            if s.is_finite() {
                return Val::Plain(s);
            }
        }
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let (big, small) = if self.lnmag().cmp(o.lnmag()) != Ordering::Less {
            (self, o)
        } else {
            (o, self)
        };
        match (big.lnmag(), small.lnmag()) {
            (LnMag::Small(bl), LnMag::Small(sl)) => {
                let r = (sl - bl).exp();
                let corr = if big.sign() == small.sign() {
                    r.ln_1p()
                } else {
                    (-r).ln_1p()
                };
                Val::from_sign_ln(big.sign(), LnMag::Small(bl + corr))
            }
            // the smaller summand cannot move a two-level magnitude
            _ => *big,
        }
    }

    pub fn sub(&self, o: &Val) -> Val {
        self.add(&o.neg())
    }

    /// `x^y` for `x > 0`, or integer `y` when `x < 0`.
    pub fn pow(&self, y: &Val) -> Option<Val> {
        if let (Val::Plain(a), Val::Plain(b)) = (self, y) {
            let p = a.powf(*b);
            if p.is_nan() {
                return None;
            }
            if p.is_finite() && (p.abs() > 1e-290 || *a == 0.0) {
                return Some(Val::Plain(p));
            }
        }
        match self.sign() {
            0 => {
                return match y.sign() {
                    1 => Some(Val::ZERO),
                    0 => Some(Val::Plain(1.0)),
                    _ => None,
                }
            }
            1 => return Some(self.ln_val()?.mul(y).exp()),
            _ => {}
        }
        let yf = y.to_f64();
        if yf.fract() != 0.0 || !yf.is_finite() {
            return None;
        }
        let r = self.neg().ln_val()?.mul(y).exp();
        Some(if yf.abs() % 2.0 == 1.0 { r.neg() } else { r })
    }

    pub fn floor(&self) -> Val {
        match *self {
            Val::Plain(x) => Val::Plain(x.floor()),
            Val::Log { sign, .. } if sign < 0 || self.ln_abs() > 0.0 => *self,
            Val::Log { .. } => Val::ZERO,
        }
    }

    pub fn ceil(&self) -> Val {
        match *self {
            Val::Plain(x) => Val::Plain(x.ceil()),
            Val::Log { sign, .. } if sign > 0 && self.ln_abs() < 0.0 => Val::Plain(1.0),
            Val::Log { sign, .. } if sign < 0 && self.ln_abs() < 0.0 => Val::ZERO,
            _ => *self,
        }
    }

    pub fn cmp_val(&self, o: &Val) -> Ordering {
        if let (Val::Plain(x), Val::Plain(y)) = (self, o) {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
        match self.sign().cmp(&o.sign()) {
            Ordering::Equal => {}
            other => return other,
        }
        let c = self.lnmag().cmp(o.lnmag());
        if self.sign() < 0 {
            c.reverse()
        } else {
            c
        }
    }
}

/// Magnitude of `ln|x| + ln|y|`.
fn ln_sum(a: LnMag, b: LnMag) -> LnMag {
    use LnMag::*;
    match (a, b) {
        (Small(x), Small(y)) => Small(x + y),
        (Huge(x), Small(y)) | (Small(y), Huge(x)) => {
            if y >= 0.0 {
                Huge(x)
            } else {
                // e^{x} - |y|, with |y| tiny against e^{x}
                Huge(x + (y * (-x).exp()).ln_1p())
            }
        }
        (Huge(x), Huge(y)) => {
            let m = x.max(y);
            Huge(m + ((x - m).exp() + (y - m).exp()).ln())
        }
    }
}
