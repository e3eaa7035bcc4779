use std::sync::Arc;

use super::l1_term;
use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, ProximalSetup};
use crate::sliding::{CompositeProblem, OracleSettings, SmoothTerm};

/// Row-major sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n_cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if let Some((j, _)) = row.iter().find(|(j, _)| *j >= n_cols) {
                return Err(Error::invalid("A", format!("row {i} has column {j} >= {n_cols}")));
            }
        }
        Ok(SparseMatrix { n_cols, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|(j, v)| v * x[*j]).sum()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows.len()).map(|i| self.row_dot(i, x)).collect()
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (row, yi) in self.rows.iter().zip(y) {
            for (j, v) in row {
                out[*j] += v * yi;
            }
        }
        out
    }

    /// `‖A‖₂²` by power iteration on `AᵀA`.
    pub fn spectral_norm_sq(&self, iters: usize, tol: f64) -> f64 {
        let n = self.n_cols;
        if n == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w = self.mul_t(&self.mul(&v));
            let norm = crate::linalg::norm2(&w);
            if norm == 0.0 {
                return 0.0;
            }
            let next = crate::linalg::dot(&v, &w);
            v = w.into_iter().map(|x| x / norm).collect();
            let done = (next - lambda).abs() <= tol * next.abs();
            lambda = next;
            if done {
                break;
            }
        }
        lambda
    }
}

/// `g(x) = (1/m) Σ log(1 + exp(−yᵢ ⟨aᵢ, x⟩))`, `f(x) = l1 ‖x‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegLassoInstance {
    pub a: SparseMatrix,
    pub labels: Vec<f64>,
    pub l1: f64,
}

/// `log(1 + eᶻ)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + e⁻ᶻ)` without overflow.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogRegLassoInstance {
    pub fn new(a: SparseMatrix, labels: Vec<f64>, l1: f64) -> Result<Self> {
        if labels.len() != a.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: a.n_rows(),
                got: labels.len(),
            });
        }
        if let Some((i, y)) = labels.iter().enumerate().find(|(_, y)| **y != 1.0 && **y != -1.0) {
            return Err(Error::invalid("labels", format!("label {y} at row {i} is not -1 or +1")));
        }
        if !(l1 >= 0.0) {
            return Err(Error::invalid("l1", "must be >= 0"));
        }
        Ok(LogRegLassoInstance { a, labels, l1 })
    }

    pub fn m(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n(&self) -> usize {
        self.a.n_cols
    }

    pub fn g_value(&self, x: &[f64]) -> f64 {
        let m = self.m() as f64;
        (0..self.m())
            .map(|i| softplus(-self.labels[i] * self.a.row_dot(i, x)))
            .sum::<f64>()
            / m
    }

    pub fn g_grad(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m() as f64;
        let w: Vec<f64> = (0..self.m())
            .map(|i| {
                let y = self.labels[i];
                -y * sigmoid(-y * self.a.row_dot(i, x)) / m
            })
            .collect();
        self.a.mul_t(&w)
    }

    pub fn f_value(&self, x: &[f64]) -> f64 {
        self.l1 * crate::linalg::norm1(x)
    }

    /// `‖A‖₂² / (4m)`.
    pub fn smoothness(&self) -> f64 {
        self.a.spectral_norm_sq(50, 1e-8) / (4.0 * self.m() as f64)
    }

    /// Unconstrained problem; `bound_hint` stands in for the diameter.
    pub fn problem(&self, bound_hint: f64, oracle: &OracleSettings, seed: u64) -> Result<CompositeProblem> {
        let (i1, i2) = (Arc::new(self.clone()), Arc::new(self.clone()));
        let g = SmoothTerm {
            value: Arc::new(move |x: &[f64]| i1.g_value(x)),
            grad: Arc::new(move |x: &[f64]| i2.g_grad(x)),
            lipschitz: self.smoothness(),
            strong_convexity: 0.0,
        };
        let set = FeasibleSet::whole_space(self.n(), bound_hint)?;
        CompositeProblem::new(ProximalSetup::euclidean(set), g, l1_term(self.l1, self.n()), oracle, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::fd;
    use crate::rng::{stream, Stream};
    use rand::Rng;

    fn random_instance(m: usize, n: usize, seed: u64) -> LogRegLassoInstance {
        let mut rng = stream(seed, Stream::Instance);
        let rows = (0..m)
            .map(|_| {
                (0..n)
                    .filter_map(|j| rng.random_bool(0.4).then(|| (j, rng.random_range(-2.0..2.0))))
                    .collect()
            })
            .collect();
        let labels = (0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        LogRegLassoInstance::new(SparseMatrix::new(n, rows).unwrap(), labels, 1e-3).unwrap()
    }

    #[test]
    fn value_and_gradient_at_zero() {
        let inst = random_instance(30, 6, 1);
        assert!((inst.g_value(&[0.0; 6]) - std::f64::consts::LN_2).abs() < 1e-15);
        let y: Vec<f64> = inst.labels.iter().map(|y| -y / (2.0 * 30.0)).collect();
        let expected = inst.a.mul_t(&y);
        let got = inst.g_grad(&[0.0; 6]);
        assert!(fd::rel_err(&got, &expected) < 1e-14);
        let num = fd::gradient(&|x: &[f64]| inst.g_value(x), &[0.0; 6], 1e-6);
        assert!(fd::rel_err(&got, &num) < 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let inst = random_instance(40, 8, 2);
        let mut rng = stream(3, Stream::Start);
        for _ in 0..20 {
            let x: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
            let num = fd::gradient(&|x: &[f64]| inst.g_value(x), &x, 1e-6);
            assert!(fd::rel_err(&inst.g_grad(&x), &num) <= 1e-5);
        }
    }

    #[test]
    fn huge_margins_stay_finite() {
        let a = SparseMatrix::new(1, vec![vec![(0, 1.0)], vec![(0, -1.0)]]).unwrap();
        let inst = LogRegLassoInstance::new(a, vec![1.0, 1.0], 0.0).unwrap();
        let v = inst.g_value(&[1e4]);
        assert!((v - 5e3).abs() < 1e-9);
        assert!(inst.g_grad(&[1e4]).iter().all(|g| g.is_finite()));
        assert_eq!(inst.f_value(&[3.0]), 0.0);
    }

    #[test]
    fn bad_labels_are_rejected() {
        let a = SparseMatrix::new(1, vec![vec![(0, 1.0)]]).unwrap();
        assert!(LogRegLassoInstance::new(a, vec![0.0], 0.0).is_err());
    }

    #[test]
    fn power_iteration_matches_dense_eigensolve() {
        let inst = random_instance(25, 5, 4);
        let mut ata = nalgebra::DMatrix::<f64>::zeros(5, 5);
        for row in &inst.a.rows {
            for (i, vi) in row {
                for (j, vj) in row {
                    ata[(*i, *j)] += vi * vj;
                }
            }
        }
        let top = ata.symmetric_eigenvalues().max();
        assert!((inst.a.spectral_norm_sq(50, 1e-8) - top).abs() <= 1e-4 * top);
    }
}
