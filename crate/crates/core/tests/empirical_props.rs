use cfdim::empirical::{
    band_counts, boxcount_sample, build_cover, covering_estimate, dyadic_scales, falconer_estimate, fm_cover,
    fm_sibling_gaps, wang_wu_s_n, DigitSource, WangWuOptions,
};
use cfdim::pressure::DigitCap;
use cfdim::profile::{Generator, SequenceTriple};
use cfdim::empirical::CoverScheme;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn brute_bands(m: u64, k: usize) -> BTreeMap<u32, u64> {
    let mut out = BTreeMap::new();
    let mut stack = vec![(0usize, 0u128, 1u128)];
    while let Some((len, qp, q)) = stack.pop() {
        if len == k {
            let d = q * (q + qp);
            let mut band = 0u32;
            while (1u128 << band) < d {
                band += 1;
            }
            *out.entry(band).or_insert(0) += 1;
            continue;
        }
        for a in 1..=m as u128 {
            stack.push((len + 1, q, a * q + qp));
        }
    }
    out
}

/// Basic interval of `w` inside F_M: `[w_1, .., w_n + y]` for `y` in `[1/(M+1), 1]`.
fn basic(w: &[u64], m: u64) -> (BigRational, BigRational) {
    let (mut p0, mut p1, mut q0, mut q1) = (BigInt::from(1), BigInt::from(0), BigInt::from(0), BigInt::from(1));
    for &a in w {
        let (p2, q2) = (BigInt::from(a) * &p1 + &p0, BigInt::from(a) * &q1 + &q0);
        (p0, p1, q0, q1) = (p1, p2, q1, q2);
    }
    let at = |y: BigRational| (BigRational::from(p1.clone()) + &y * BigRational::from(p0.clone())) / (BigRational::from(q1.clone()) + y * BigRational::from(q0.clone()));
    let a = at(BigRational::new(1.into(), BigInt::from(m + 1)));
    let b = at(BigRational::from(BigInt::from(1)));
    if a <= b { (a, b) } else { (b, a) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bands_match_brute_force(m in 1u64..=4, k in 1usize..=6) {
        let t = band_counts(k, 64, DigitCap::Bounded(m), 10_000_000).unwrap();
        prop_assert_eq!(&t.table, &brute_bands(m, k));
        prop_assert_eq!(t.total(), m.pow(k as u32));
    }

    #[test]
    fn basic_intervals_nest_and_separate(m in 2u64..=5, w in prop::collection::vec(1u64..=5, 0..=5)) {
        let w: Vec<u64> = w.into_iter().map(|a| 1 + (a - 1) % m).collect();
        let (plo, phi) = basic(&w, m);
        let mut kids: Vec<_> = (1..=m).map(|a| { let mut c = w.clone(); c.push(a); basic(&c, m) }).collect();
        for (lo, hi) in &kids {
            prop_assert!(&plo <= lo && hi <= &phi);
        }
        kids.sort();
        let gaps: Vec<f64> = kids.windows(2).map(|p| (&p[1].0 - &p[0].1).to_f64().unwrap()).collect();
        let lib = fm_sibling_gaps(m, &w);
        prop_assert_eq!(gaps.len(), lib.len());
        for (g, l) in gaps.iter().zip(&lib) {
            prop_assert!(*g > 0.0);
            prop_assert!((g - l).abs() <= 1e-12 * g.abs());
        }
    }
}

#[test]
fn falconer_never_exceeds_covering() {
    let mut covers = vec![fm_cover(2, 10).unwrap(), fm_cover(3, 7).unwrap(), fm_cover(5, 5).unwrap()];
    let t = SequenceTriple::symmetric(
        Generator::parse_plain("k^2").unwrap(),
        Generator::parse_plain("exp(k^2)").unwrap(),
    );
    covers.push(build_cover(&t, 2, 6, CoverScheme::Natural).unwrap());
    for lv in &covers {
        let f = falconer_estimate(lv).unwrap();
        let c = covering_estimate(lv).unwrap();
        assert!(f.final_value <= c.final_value + 1e-12, "{} > {}", f.final_value, c.final_value);
    }
}

#[test]
fn wang_wu_brackets_overlap() {
    let o = WangWuOptions::default();
    let rs: Vec<_> = (2..=4).map(|n| wang_wu_s_n(2.0, n, &o).unwrap()).collect();
    for w in rs.windows(2) {
        assert!(w[0].lo <= w[1].hi && w[1].lo <= w[0].hi, "{:?} {:?}", w[0], w[1]);
    }
    let big = wang_wu_s_n(1e6, 4, &o).unwrap();
    assert!(big.lo >= 0.5 && big.hi < 0.51, "{big:?}");
}

#[test]
fn estimators_are_deterministic() {
    let s = dyadic_scales(3, 9);
    let a = boxcount_sample(&DigitSource::Cap(3), 4000, 14, &s, 11).unwrap();
    let b = boxcount_sample(&DigitSource::Cap(3), 4000, 14, &s, 11).unwrap();
    let c = boxcount_sample(&DigitSource::Cap(3), 4000, 14, &s, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.counts, c.counts);
    assert_eq!(fm_cover(2, 8).unwrap(), fm_cover(2, 8).unwrap());
    let o = WangWuOptions::default();
    assert_eq!(wang_wu_s_n(3.0, 3, &o).unwrap(), wang_wu_s_n(3.0, 3, &o).unwrap());
}
