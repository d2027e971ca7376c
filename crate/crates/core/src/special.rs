//! Hurwitz zeta and log-domain accumulation.

/// `B_{2j} / (2j)!` for j = 1..7.
const BERNOULLI_OVER_FACT: [f64; 7] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
];

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q+k)^{-s}` for `s > 1`, `q > 0`, by Euler–Maclaurin
/// after shifting `q` past 12.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    assert!(s > 1.0 && q > 0.0, "hurwitz_zeta needs s > 1, q > 0");
    let mut head = 0.0;
    let mut x = q;
    while x < 12.0 {
        head += x.powf(-s);
        x += 1.0;
    }
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s(s+1)..(s+2j-2) times x^{-s-2j+1}
    let mut rise = s;
    let mut pw = x.powf(-s - 1.0);
    let x2 = x * x;
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        tail += c * rise * pw;
        let k = 2.0 * (j as f64 + 1.0);
        rise *= (s + k - 1.0) * (s + k);
        pw /= x2;
    }
    head + tail
}

/// `Σ_{j > m} j^{-s}` bounded above: exact partial sum to a cutoff plus the integral tail.
pub fn power_tail_upper(s: f64, m: u64) -> f64 {
    assert!(s > 1.0);
    let cutoff = m + 20_000;
    let mut acc = 0.0;
    // small terms first for accuracy
    for j in ((m + 1)..=cutoff).rev() {
        acc += (j as f64).powf(-s);
    }
    acc + (cutoff as f64).powf(1.0 - s) / (s - 1.0)
}

/// Streaming log-sum-exp.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        } else {
            self.sum += other.sum * (other.max - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(s: f64, q: f64) -> f64 {
        // brute force with an integral tail correction
        let n = 200_000;
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc += (q + k as f64).powf(-s);
        }
        let x = q + n as f64;
        acc + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s)
    }

    #[test]
    fn zeta_values() {
        let z2 = hurwitz_zeta(2.0, 1.0);
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        let z4 = hurwitz_zeta(4.0, 1.0);
        assert!((z4 - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-14);
        for &(s, q) in &[(1.1, 1.3), (1.6, 17.5), (3.0, 0.25), (1.01, 129.0)] {
            let a = hurwitz_zeta(s, q);
            let b = direct(s, q);
            assert!(((a - b) / a).abs() < 1e-9, "s={s} q={q}: {a} vs {b}");
        }
    }

    #[test]
    fn tail_upper_dominates() {
        let up = power_tail_upper(2.0, 100);
        let exact = hurwitz_zeta(2.0, 101.0);
        assert!(up >= exact && up - exact < 1e-8);
    }

    #[test]
    fn logsum() {
        let mut s = LogSum::new();
        for x in [-1000.0, -1000.0, -1001.0] {
            s.add(x);
        }
        let want = -1000.0 + (2.0 + (-1f64).exp()).ln();
        assert!((s.value() - want).abs() < 1e-12);
        let mut t = LogSum::new();
        t.add(5.0);
        t.merge(&s);
        assert!((t.value() - log_add_exp(5.0, want)).abs() < 1e-12);
    }
}
