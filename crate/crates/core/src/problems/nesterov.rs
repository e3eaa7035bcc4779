use std::sync::Arc;

use super::l1_term;
use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, ProximalSetup};
use crate::sliding::{CompositeProblem, OracleSettings, SmoothTerm};

/// `g(x) = (L/8)(x₁² + Σ (xᵢ − xᵢ₊₁)² + xₙ²) − L x₁/4` plus `l1 ‖x‖₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NesterovLassoInstance {
    pub n: usize,
    pub l: f64,
    pub l1: f64,
}

impl NesterovLassoInstance {
    pub fn new(n: usize, l: f64, l1: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "must be >= 2"));
        }
        if !(l > 0.0) {
            return Err(Error::invalid("L", "must be positive"));
        }
        Ok(NesterovLassoInstance { n, l, l1 })
    }

    pub fn g_value(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut s = x[0] * x[0] + x[n - 1] * x[n - 1];
        for i in 0..n - 1 {
            s += (x[i] - x[i + 1]).powi(2);
        }
        self.l / 8.0 * s - self.l * x[0] / 4.0
    }

    /// `(L/4)(T x − e₁)` with T the [−1, 2, −1] tridiagonal matrix.
    pub fn g_grad(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let q = self.l / 4.0;
        (0..n)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                let e1 = if i == 0 { 1.0 } else { 0.0 };
                q * (2.0 * x[i] - left - right - e1)
            })
            .collect()
    }

    /// Minimizer of g alone: `xᵢ = 1 − i/(n+1)`.
    pub fn g_minimizer(&self) -> Vec<f64> {
        let n = self.n as f64;
        (1..=self.n).map(|i| 1.0 - i as f64 / (n + 1.0)).collect()
    }

    /// Largest Hessian eigenvalue, `(L/4)(2 − 2cos(nπ/(n+1)))`.
    pub fn hessian_lambda_max(&self) -> f64 {
        let n = self.n as f64;
        self.l / 4.0 * (2.0 - 2.0 * (n * std::f64::consts::PI / (n + 1.0)).cos())
    }

    pub fn problem(&self, bound_hint: f64, oracle: &OracleSettings, seed: u64) -> Result<CompositeProblem> {
        let (a, b) = (*self, *self);
        let g = SmoothTerm {
            value: Arc::new(move |x: &[f64]| a.g_value(x)),
            grad: Arc::new(move |x: &[f64]| b.g_grad(x)),
            lipschitz: self.l,
            strong_convexity: 0.0,
        };
        let set = FeasibleSet::whole_space(self.n, bound_hint)?;
        CompositeProblem::new(ProximalSetup::euclidean(set), g, l1_term(self.l1, self.n), oracle, seed)
    }
}
