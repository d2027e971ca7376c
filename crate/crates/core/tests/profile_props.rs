use cfdim::profile::{
    function_profile, growth_profile, ExtReal, FunctionHorizon, Generator, LimitEstimate, Overrides, SequenceTriple,
};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn rank(e: &LimitEstimate) -> Option<f64> {
    match e.value {
        ExtReal::Zero => Some(0.0),
        ExtReal::Finite(x) => Some(x),
        ExtReal::Infinite => Some(f64::INFINITY),
        ExtReal::Unknown => None,
    }
}

const PSI: [&str; 6] = ["B^n", "exp(n^P)", "B^(n^P)", "n^P + 1", "exp(B^n)", "B^n * (n + 1)"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn alpha_trace_dominates_beta(p in 2u32..=4, b in 1.5f64..20.0, half in any::<bool>()) {
        let pr = params(&[("P", p as f64), ("B", b)]);
        let s = if half { "B^(n_k/2)" } else { "B^n_k" };
        let t = SequenceTriple::symmetric(
            Generator::parse("k^P", &pr).unwrap(),
            Generator::parse(s, &pr).unwrap(),
        );
        let g = growth_profile(&t, 48).unwrap();
        for (a, bt) in g.traces.ln_alpha.iter().zip(&g.traces.ln_beta) {
            prop_assert!(*a >= *bt - 1e-12);
        }
        if let (ExtReal::Finite(a), ExtReal::Finite(bv)) = (g.alpha.value, g.beta.value) {
            prop_assert!(a >= bv - 1e-9);
        }
    }

    #[test]
    fn overrides_are_reported(a in 0.1f64..50.0, b in 0.0f64..1.0) {
        let t = SequenceTriple::symmetric(
            Generator::parse_plain("k^2").unwrap(),
            Generator::parse_plain("3^n_k").unwrap(),
        )
        .with_overrides(Overrides {
            alpha: Some(ExtReal::Finite(a)),
            beta: Some(ExtReal::Finite(a * b)),
            ..Overrides::default()
        });
        let g = growth_profile(&t, 32).unwrap();
        prop_assert_eq!(g.alpha.value, ExtReal::Finite(a));
        prop_assert_eq!(g.beta.value, ExtReal::Finite(a * b));
    }

    #[test]
    fn liminf_below_limsup(i in 0usize..6, b in 1.2f64..30.0, p in 0.2f64..3.0) {
        let g = Generator::parse(PSI[i], &params(&[("B", b), ("P", p)])).unwrap();
        let fp = function_profile(&g, &FunctionHorizon::with_n_max(1e12)).unwrap();
        if let (Some(lo), Some(hi)) = (rank(&fp.b_big), rank(&fp.c_big)) {
            prop_assert!(lo <= hi + 1e-9, "{} B={} C={}", PSI[i], lo, hi);
        }
        if let (Some(lo), Some(hi)) = (rank(&fp.b_small), rank(&fp.c_small)) {
            prop_assert!(lo <= hi + 1e-9);
        }
        for e in [&fp.b_big, &fp.c_big, &fp.b_small, &fp.c_small] {
            if let Some(v) = rank(e) {
                prop_assert!(v >= 0.0);
            }
        }
    }

    #[test]
    fn profiles_are_deterministic(i in 0usize..6, b in 1.2f64..30.0) {
        let pr = params(&[("B", b), ("P", 1.5)]);
        let h = FunctionHorizon::with_n_max(1e12);
        let x = function_profile(&Generator::parse(PSI[i], &pr).unwrap(), &h).unwrap();
        let y = function_profile(&Generator::parse(PSI[i], &pr).unwrap(), &h).unwrap();
        prop_assert_eq!(serde_json::to_string(&x).unwrap(), serde_json::to_string(&y).unwrap());
        let t = SequenceTriple::symmetric(Generator::parse_plain("k^3").unwrap(), Generator::parse("B^n_k", &pr).unwrap());
        let u = serde_json::to_string(&growth_profile(&t, 40).unwrap()).unwrap();
        let v = serde_json::to_string(&growth_profile(&t, 40).unwrap()).unwrap();
        prop_assert_eq!(u, v);
    }
}

#[test]
fn geometric_profile_values() {
    let g = Generator::parse("B^n", &params(&[("B", 7.0)])).unwrap();
    let fp = function_profile(&g, &FunctionHorizon::default()).unwrap();
    let v = rank(&fp.b_big).unwrap();
    assert!((v - 7.0).abs() < 1e-6 && fp.limit_flag);
}
