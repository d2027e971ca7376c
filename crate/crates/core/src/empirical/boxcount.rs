//! Box-counting slope from seeded random points with admissible digits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::profile::SequenceTriple;

/// Digits allowed at each position.
#[derive(Debug, Clone)]
pub enum DigitSource {
    /// Any of the listed digits, everywhere.
    Set(Vec<u64>),
    /// Digits `1..=M`.
    Cap(u64),
    /// A digit in `(s_k, s_k + t_k]` at each `n_k`, digits `1..=L` elsewhere.
    Triple { triple: SequenceTriple, digit_bound: u64 },
}

/// Per-position digit ranges `[lo, hi]`, or an explicit set.
enum Alphabet {
    Set(Vec<u64>),
    Ranges(Vec<(u64, u64)>),
}

impl Alphabet {
    fn draw(&self, pos: usize, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Alphabet::Set(s) => s[rng.gen_range(0..s.len())],
            Alphabet::Ranges(r) => {
                let (lo, hi) = r[pos];
                rng.gen_range(lo..=hi)
            }
        }
    }

    /// Largest cylinder length at `depth`: all digits minimal.
    fn resolution(&self, depth: usize) -> f64 {
        let mut q = (0.0f64, 1.0f64);
        for pos in 0..depth {
            let a = match self {
                Alphabet::Set(s) => *s.iter().min().expect("nonempty") as f64,
                Alphabet::Ranges(r) => r[pos].0 as f64,
            };
            q = (q.1, a * q.1 + q.0);
            // rescale; only the ratio and the log matter here
            if q.1 > 1e150 {
                return 0.0;
            }
        }
        1.0 / (q.1 * (q.1 + q.0))
    }
}

fn alphabet(src: &DigitSource, depth: usize) -> Result<Alphabet> {
    match src {
        DigitSource::Set(s) => {
            if s.is_empty() || s.contains(&0) {
                return Err(Error::domain("digit set must be nonempty and positive"));
            }
            let mut v = s.clone();
            v.sort_unstable();
            v.dedup();
            Ok(Alphabet::Set(v))
        }
        DigitSource::Cap(m) => {
            if *m == 0 {
                return Err(Error::domain("digit cap must be at least 1"));
            }
            Ok(Alphabet::Ranges(vec![(1, *m); depth]))
        }
        DigitSource::Triple { triple, digit_bound } => {
            if *digit_bound == 0 {
                return Err(Error::domain("digit bound must be at least 1"));
            }
            let mut ranges = vec![(1, *digit_bound); depth];
            let mut k = 1;
            loop {
                let terms = triple.evaluate(k)?;
                let (n, s, t) = &terms[k - 1];
                let pos = n.to_f64();
                if pos > depth as f64 {
                    break;
                }
                let (s, t) = (s.to_f64(), t.to_f64());
                if !((s + t) < 9e18) {
                    return Err(Error::domain(format!("digits at n_{k} exceed 64 bits")));
                }
                let lo = s.floor() as u64 + 1;
                let hi = (s + t).floor() as u64;
                if hi < lo {
                    return Err(Error::Degenerate(format!("no integer in (s_{k}, s_{k} + t_{k}]")));
                }
                ranges[pos as usize - 1] = (lo, hi);
                k += 1;
            }
            Ok(Alphabet::Ranges(ranges))
        }
    }
}

/// Point `[a_1, .., a_n]` via continuants, normalised each step.
fn point(digits: &[u64]) -> f64 {
    let (mut p0, mut p1, mut q0, mut q1) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
    for &a in digits {
        let a = a as f64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        let s = 1.0 / q2;
        p0 = p1 * s;
        q0 = q1 * s;
        p1 = p2 * s;
        q1 = 1.0;
    }
    p1 / q1
}

/// Result of [`boxcount_sample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    /// `(δ, N(δ))` per scale.
    pub counts: Vec<(f64, u64)>,
    /// Least-squares slope of `ln N(δ)` against `-ln δ`.
    pub slope: f64,
    pub points: usize,
    pub depth: usize,
    pub seed: u64,
}

const STREAMS: u64 = 16;

/// Samples `count` points with uniformly drawn admissible digits up to `depth` and fits
/// the box-counting slope over `scales`. Output depends only on the arguments.
pub fn boxcount_sample(src: &DigitSource, count: usize, depth: usize, scales: &[f64], seed: u64) -> Result<BoxCount> {
    if count == 0 || depth == 0 {
        return Err(Error::domain("count and depth must be positive"));
    }
    if scales.len() < 2 || scales.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
        return Err(Error::domain("need at least two scales in (0, 1)"));
    }
    let alpha = alphabet(src, depth)?;
    let res = alpha.resolution(depth);
    let finest = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    if finest < res {
        return Err(Error::domain(format!(
            "scale {finest:.3e} is below the depth-{depth} resolution {res:.3e}"
        )));
    }
    let per = count.div_ceil(STREAMS as usize);
    let chunks: Vec<Vec<f64>> = (0..STREAMS)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w);
            let n = per.min(count.saturating_sub(w as usize * per));
            let mut digits = vec![0u64; depth];
            (0..n)
                .map(|_| {
                    for (pos, d) in digits.iter_mut().enumerate() {
                        *d = alpha.draw(pos, &mut rng);
                    }
                    point(&digits)
                })
                .collect()
        })
        .collect();
    let pts: Vec<f64> = chunks.into_iter().flatten().collect();
    let counts: Vec<(f64, u64)> = scales
        .iter()
        .map(|&d| {
            let boxes: HashSet<i64> = pts.iter().map(|x| (x / d).floor() as i64).collect();
            (d, boxes.len() as u64)
        })
        .collect();
    let xs: Vec<f64> = counts.iter().map(|c| -c.0.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(BoxCount {
        counts,
        slope: sxy / sxx,
        points: pts.len(),
        depth,
        seed,
    })
}

/// Dyadic scales `2^{-j}` for `j` in `lo..=hi`.
pub fn dyadic_scales(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(-(j as i32))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuant_points() {
        assert!((point(&[1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]) - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(point(&[2]), 0.5);
        assert!((point(&[3, 7]) - 7.0 / 22.0).abs() < 1e-15);
    }

    #[test]
    fn single_digit_is_a_point() {
        let r = boxcount_sample(&DigitSource::Set(vec![1]), 1000, 20, &dyadic_scales(4, 12), 7).unwrap();
        assert!(r.slope.abs() < 1e-12);
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = boxcount_sample(&DigitSource::Cap(2), 5000, 16, &dyadic_scales(4, 10), 3).unwrap();
        let b = boxcount_sample(&DigitSource::Cap(2), 5000, 16, &dyadic_scales(4, 10), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_fine_scale_is_rejected() {
        assert!(boxcount_sample(&DigitSource::Cap(2), 10, 4, &dyadic_scales(4, 30), 1).is_err());
    }
}
