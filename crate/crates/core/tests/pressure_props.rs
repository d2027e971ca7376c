use cfdim::pressure::{
    pressure_full, pressure_restricted, restricted_log_sum, DigitCap, Method, PressureConfig, PressureQuery,
};
use proptest::prelude::*;

/// `ln Σ q_n^{-2θ}` over `{1..=m}^n` by explicit word enumeration in u128.
fn brute_log_sum(theta: f64, m: u64, n: usize) -> f64 {
    fn rec(theta: f64, m: u64, left: usize, qp: u128, q: u128, acc: &mut f64) {
        if left == 0 {
            *acc += (q as f64).powf(-2.0 * theta);
            return;
        }
        for a in 1..=m as u128 {
            rec(theta, m, left - 1, q, a * q + qp, acc);
        }
    }
    let mut acc = 0.0;
    rec(theta, m, n, 0, 1, &mut acc);
    acc.ln()
}

fn query(theta: f64, m: u64, depth: usize, method: Method) -> PressureQuery {
    PressureQuery {
        theta,
        cap: DigitCap::Bounded(m),
        depth,
        method,
    }
}

fn bracket(theta: f64, m: u64, depth: usize) -> (f64, f64) {
    let b = pressure_restricted(&query(theta, m, depth, Method::Auto), &PressureConfig::default()).unwrap();
    (b.lower, b.upper)
}

#[test]
fn enumeration_matches_brute_force() {
    let cfg = PressureConfig::default();
    for m in 1..=4 {
        for n in 1..=7 {
            for theta in [0.6, 0.8, 1.0] {
                let got = restricted_log_sum(&query(theta, m, n, Method::Enumerate), &cfg).unwrap();
                let want = brute_log_sum(theta, m, n);
                assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "M={m} n={n} θ={theta}");
            }
        }
    }
}

#[test]
fn enumeration_and_operator_agree() {
    let cfg = PressureConfig::default();
    for m in 1..=4 {
        for n in 1..=8 {
            for theta in [0.6, 0.8, 1.0] {
                let e = restricted_log_sum(&query(theta, m, n, Method::Enumerate), &cfg).unwrap();
                let o = restricted_log_sum(&query(theta, m, n, Method::OperatorIteration), &cfg).unwrap();
                assert!((e - o).abs() < 1e-8, "M={m} n={n} θ={theta}: {e} vs {o}");
            }
        }
    }
}

#[test]
fn single_digit_is_golden() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    for theta in [0.3, 0.6, 0.8, 1.0, 1.7] {
        let want = -2.0 * theta * phi.ln();
        for n in [4, 10, 40] {
            let (lo, hi) = bracket(theta, 1, n);
            assert!(lo <= want && want <= hi, "θ={theta} n={n}: {want} not in [{lo}, {hi}]");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn depths_overlap(theta in 0.3f64..1.5, m in 1u64..=6, n in 1usize..=12, n2 in 1usize..=12) {
        let (a, b) = bracket(theta, m, n);
        let (c, d) = bracket(theta, m, n2);
        prop_assert!(a <= d + 1e-12 && c <= b + 1e-12, "[{a}, {b}] vs [{c}, {d}]");
    }

    #[test]
    fn monotone_in_cap(theta in 0.3f64..1.5, m in 1u64..=8, n in 2usize..=10) {
        let (lo, _) = bracket(theta, m, n);
        let (_, hi) = bracket(theta, m + 1, n);
        prop_assert!(lo <= hi + 1e-12);
    }

    #[test]
    fn monotone_in_theta(t1 in 0.3f64..1.5, dt in 0.0f64..0.5, m in 1u64..=8, n in 2usize..=10) {
        let t2 = t1 + dt;
        let (a, b) = bracket(t1, m, n);
        let (c, d) = bracket(t2, m, n);
        prop_assert!(a >= d - ((b - a) + (d - c)) - 1e-12);
    }
}

#[test]
fn full_bracket_dominates_restricted() {
    let cfg = PressureConfig::default();
    for theta in [0.6, 0.75, 1.0] {
        let r = bracket(theta, 20, 10);
        let f = pressure_full(theta, 20, 10, Method::Auto, &cfg).unwrap();
        assert!(f.lower <= r.0 + 1e-12 && f.upper >= r.1);
    }
}
