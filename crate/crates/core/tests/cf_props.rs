use cfdim::cf::{continuants, cylinder, gauss_expand_rational, tail_beyond, DigitWord};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Independent continuant pair `(q_{n-1}, q_n)` by the two-term recursion.
fn q_pair(digits: &[u64]) -> (BigUint, BigUint) {
    let mut a = BigUint::zero();
    let mut b = BigUint::one();
    for &d in digits {
        let c = BigUint::from(d) * &b + &a;
        a = b;
        b = c;
    }
    (a, b)
}

fn len_oracle(digits: &[u64]) -> BigRational {
    let (qp, q) = q_pair(digits);
    BigRational::new(BigInt::one(), BigInt::from(&q * (&q + qp)))
}

fn word(d: &[u64]) -> DigitWord {
    DigitWord::from_u64s(d).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn digits(max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..=50, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn cylinder_length_matches_oracle(w in digits(12)) {
        let c = cylinder(&word(&w));
        prop_assert_eq!(&c.length, &len_oracle(&w));
        prop_assert_eq!(&c.hi - &c.lo, c.length);
    }

    #[test]
    fn distortion_within_two(u in digits(12), v in digits(12)) {
        let uv: Vec<u64> = u.iter().chain(&v).copied().collect();
        let r = len_oracle(&uv) / (cylinder(&word(&u)).length * cylinder(&word(&v)).length);
        prop_assert!(r >= rat(1, 2) && r <= rat(2, 1), "ratio {}", r);
    }

    #[test]
    fn deleting_a_digit(w in digits(12), k in 0usize..12) {
        let k = k % w.len();
        let mut del = w.clone();
        let ak = del.remove(k);
        let qn = q_pair(&w).1;
        let qd = q_pair(&del).1;
        // q_n > (a_k / 2) q_{n-1}(deleted)
        prop_assert!(BigUint::from(2u32) * &qn > BigUint::from(ak) * &qd);
        prop_assert_eq!(q_pair(&w).1, continuants(&word(&w)).q_cur);
    }

    #[test]
    fn cylinder_separation(w in prop::collection::vec(1u64..=50, 2..=12), k in 0usize..12) {
        let k = k % w.len();
        let mut del = w.clone();
        let ak = del.remove(k);
        let r = len_oracle(&w) / (len_oracle(&[ak]) * len_oracle(&del));
        prop_assert!(r >= rat(1, 8) && r <= rat(8, 1), "ratio {}", r);
    }

    #[test]
    fn unimodular(w in digits(20)) {
        let c = continuants(&word(&w));
        let lhs = BigInt::from(c.p_prev.clone()) * BigInt::from(c.q_cur.clone());
        let rhs = BigInt::from(c.p_cur.clone()) * BigInt::from(c.q_prev.clone());
        let want = if w.len() % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        prop_assert_eq!(lhs - rhs, want);
    }

    #[test]
    fn partition_identity(w in prop::collection::vec(1u64..=50, 0..=10), a_max in 1u64..40) {
        let parent = word(&w);
        let mut total = tail_beyond(&parent, &BigUint::from(a_max));
        for a in 1..=a_max {
            let mut child = w.clone();
            child.push(a);
            total += cylinder(&word(&child)).length;
        }
        prop_assert_eq!(total, cylinder(&parent).length);
    }

    #[test]
    fn children_nest_in_parent(w in digits(8), a in 1u64..60) {
        let mut c = w.clone();
        c.push(a);
        prop_assert!(cylinder(&word(&w)).contains(&cylinder(&word(&c))));
    }

    #[test]
    fn expansion_reconstructs(num in 1i64..1_000_000, extra in 1i64..1_000_000, n in 1usize..30) {
        let x = rat(num, num + extra);
        let e = gauss_expand_rational(&x, n).unwrap();
        let c = continuants(&e.word);
        let a = BigRational::new(c.p_cur.clone().into(), c.q_cur.clone().into());
        let b = BigRational::new((&c.p_cur + &c.p_prev).into(), (&c.q_cur + &c.q_prev).into());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(lo <= x && x <= hi);
        prop_assert!(e.word.len() <= n);
    }
}
