//! Grid discretisation of the weighted transfer operator
//! `(L g)(x) = Σ_a (a+x)^{-2θ} g(1/(a+x))`.
//!
//! `L^n 1` evaluated at `0` is exactly `Σ q_n^{-2θ}`; the grid version approximates it.
//! Digits beyond the explicit range are summed with Hurwitz zeta values against a
//! degree-5 polynomial fitted to `g` near `0`.

use serde::{Deserialize, Serialize};

use super::DigitCap;
use crate::error::{Error, Result};
use crate::special::hurwitz_zeta;

/// Interpolation scheme on the uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interp {
    Linear,
    Cubic,
}

/// Grid used by the operator method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorGrid {
    pub size: usize,
    pub interp: Interp,
}

impl Default for OperatorGrid {
    fn default() -> Self {
        Self {
            size: 512,
            interp: Interp::Cubic,
        }
    }
}

impl OperatorGrid {
    pub fn order(&self) -> usize {
        match self.interp {
            Interp::Linear => 1,
            Interp::Cubic => 3,
        }
    }

    pub fn from_order(size: usize, order: usize) -> Result<Self> {
        let interp = match order {
            1 => Interp::Linear,
            3 => Interp::Cubic,
            _ => return Err(Error::domain("interpolation order must be 1 or 3")),
        };
        if size < 8 {
            return Err(Error::domain("grid needs at least 8 points"));
        }
        Ok(Self { size, interp })
    }
}

/// Degree of the near-zero fit used for the digit tail.
const FIT_DEG: usize = 5;

/// Sparse matrix of the discretised operator.
#[derive(Debug, Clone)]
pub struct TransferOperator {
    theta: f64,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

fn interp_stencil(y: f64, g: usize, interp: Interp, out: &mut [(usize, f64); 4]) -> usize {
    let h_inv = (g - 1) as f64;
    let u = (y * h_inv).clamp(0.0, h_inv);
    match interp {
        Interp::Linear => {
            let j = (u.floor() as usize).min(g - 2);
            let t = u - j as f64;
            out[0] = (j, 1.0 - t);
            out[1] = (j + 1, t);
            2
        }
        Interp::Cubic => {
            let j = u.floor() as usize;
            let j0 = j.saturating_sub(1).min(g - 4);
            let s = u - j0 as f64;
            out[0] = (j0, -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0);
            out[1] = (j0 + 1, s * (s - 2.0) * (s - 3.0) / 2.0);
            out[2] = (j0 + 2, -s * (s - 1.0) * (s - 3.0) / 2.0);
            out[3] = (j0 + 3, s * (s - 1.0) * (s - 2.0) / 6.0);
            4
        }
    }
}

/// Monomial coefficients (in t) of the Lagrange basis on nodes 0..=FIT_DEG.
fn lagrange_monomials() -> [[f64; FIT_DEG + 1]; FIT_DEG + 1] {
    let mut out = [[0.0; FIT_DEG + 1]; FIT_DEG + 1];
    for (l, row) in out.iter_mut().enumerate() {
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for m in 0..=FIT_DEG {
            if m == l {
                continue;
            }
            // multiply by (t - m)
            let mut next = vec![0.0; poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * m as f64;
            }
            poly = next;
            denom *= l as f64 - m as f64;
        }
        for (j, c) in poly.iter().enumerate() {
            row[j] = c / denom;
        }
    }
    out
}

impl TransferOperator {
    /// Number of digits handled one by one before the zeta tail takes over.
    pub fn explicit_digits(grid: &OperatorGrid) -> u64 {
        (((grid.size - 1) / 4 + 1) as u64).max(16)
    }

    pub fn new(theta: f64, cap: DigitCap, grid: &OperatorGrid) -> Result<Self> {
        let g = grid.size;
        if g < 8 {
            return Err(Error::domain("grid needs at least 8 points"));
        }
        if !(theta > 0.0) {
            return Err(Error::domain("theta must be positive"));
        }
        if matches!(cap, DigitCap::Unbounded) && theta <= 0.5 {
            return Err(Error::domain("unbounded alphabet needs theta > 1/2"));
        }
        if let DigitCap::Bounded(0) = cap {
            return Err(Error::domain("digit cap must be at least 1"));
        }
        let s = 2.0 * theta;
        let a_exp = Self::explicit_digits(grid);
        let explicit = match cap {
            DigitCap::Bounded(m) => m.min(a_exp),
            DigitCap::Unbounded => a_exp,
        };
        let has_tail = match cap {
            DigitCap::Bounded(m) => m > a_exp,
            DigitCap::Unbounded => true,
        };
        let h = 1.0 / (g - 1) as f64;
        let basis = lagrange_monomials();

        let mut row_ptr = Vec::with_capacity(g + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut dense = vec![0.0f64; g];
        let mut touched = vec![false; g];
        let mut idx: Vec<usize> = Vec::new();
        let mut st = [(0usize, 0.0f64); 4];
        row_ptr.push(0);
        for i in 0..g {
            let x = i as f64 * h;
            for a in 1..=explicit {
                let ax = a as f64 + x;
                let w = ax.powf(-s);
                let k = interp_stencil(1.0 / ax, g, grid.interp, &mut st);
                for &(j, c) in &st[..k] {
                    if !touched[j] {
                        touched[j] = true;
                        idx.push(j);
                    }
                    dense[j] += w * c;
                }
            }
            if has_tail {
                // Σ_{a in tail} (a+x)^{-s-j} for j = 0..=FIT_DEG, scaled by h^{-j}
                let q0 = explicit as f64 + 1.0 + x;
                let mut moments = [0.0; FIT_DEG + 1];
                let mut hp = 1.0;
                for (j, mo) in moments.iter_mut().enumerate() {
                    let sj = s + j as f64;
                    let mut z = hurwitz_zeta(sj, q0);
                    if let DigitCap::Bounded(m) = cap {
                        z -= hurwitz_zeta(sj, m as f64 + 1.0 + x);
                    }
                    *mo = z / hp;
                    hp *= h;
                }
                for (l, coeffs) in basis.iter().enumerate() {
                    let w: f64 = coeffs.iter().zip(moments.iter()).map(|(c, m)| c * m).sum();
                    if !touched[l] {
                        touched[l] = true;
                        idx.push(l);
                    }
                    dense[l] += w;
                }
            }
            idx.sort_unstable();
            for &j in &idx {
                col.push(j as u32);
                val.push(dense[j]);
                dense[j] = 0.0;
                touched[j] = false;
            }
            idx.clear();
            row_ptr.push(col.len());
        }
        Ok(Self {
            theta,
            row_ptr,
            col,
            val,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn size(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in a..b {
                acc += self.val[k] * v[self.col[k] as usize];
            }
            *o = acc;
        }
    }

    /// Start of an iteration from `g_0 = 1`.
    pub fn start(&self) -> OperatorIterate {
        OperatorIterate {
            v: vec![1.0; self.size()],
            scratch: vec![0.0; self.size()],
            log_scale: 0.0,
            log_sums: Vec::new(),
        }
    }

    /// Advances `it` until it holds `log Σ q_k^{-2θ}` for every `k <= n`.
    pub fn advance(&self, it: &mut OperatorIterate, n: usize) -> Result<()> {
        while it.log_sums.len() < n {
            self.apply(&it.v, &mut it.scratch);
            let z = it.scratch[0];
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::Budget(format!(
                    "operator iterate lost positivity at depth {}",
                    it.log_sums.len() + 1
                )));
            }
            it.log_scale += z.ln();
            it.log_sums.push(it.log_scale);
            let inv = 1.0 / z;
            for (v, s) in it.v.iter_mut().zip(it.scratch.iter()) {
                *v = s * inv;
            }
        }
        Ok(())
    }

    /// `log Σ q_n^{-2θ}` by `n` iterations from `g_0 = 1`.
    pub fn log_sum(&self, n: usize) -> Result<f64> {
        let mut it = self.start();
        self.advance(&mut it, n)?;
        Ok(it.log_sums[n - 1])
    }
}

/// Running state of an operator iteration.
#[derive(Debug, Clone)]
pub struct OperatorIterate {
    v: Vec<f64>,
    scratch: Vec<f64>,
    log_scale: f64,
    log_sums: Vec<f64>,
}

impl OperatorIterate {
    /// `log Σ q_k^{-2θ}` for `k = 1..=depth()`.
    pub fn log_sums(&self) -> &[f64] {
        &self.log_sums
    }

    pub fn depth(&self) -> usize {
        self.log_sums.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_basis_reproduces_nodes() {
        let b = lagrange_monomials();
        for (l, row) in b.iter().enumerate() {
            for m in 0..=FIT_DEG {
                let t = m as f64;
                let v: f64 = row.iter().enumerate().map(|(j, c)| c * t.powi(j as i32)).sum();
                let want = if l == m { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gauss_operator_fixed_point() {
        // θ = 1 is the Gauss transfer operator; L^n 1 → 1/((1+x) log 2), so at 0 → 1/log 2
        let op = TransferOperator::new(1.0, DigitCap::Unbounded, &OperatorGrid::default()).unwrap();
        let z = op.log_sum(40).unwrap().exp();
        assert!((z - 1.0 / std::f64::consts::LN_2).abs() < 1e-7, "{z}");
    }

    #[test]
    fn single_digit_is_fibonacci() {
        let op = TransferOperator::new(0.7, DigitCap::Bounded(1), &OperatorGrid::default()).unwrap();
        let l = op.log_sum(10).unwrap();
        assert!((l + 1.4 * 89f64.ln()).abs() < 1e-9);
    }
}
