use std::sync::Arc;

use rand::Rng;

use super::{l1_term, soft_threshold};
use crate::error::{Error, Result};
use crate::geometry::{FeasibleSet, ProximalSetup};
use crate::rng::{stream, Stream};
use crate::sliding::{CompositeProblem, OracleSettings, SmoothTerm};

/// `g(x) = ½ Σ dᵢ (xᵢ − zᵢ)²`, `f(x) = λ‖x‖₁` on a box that contains the
/// soft-threshold minimizer, so Ψ₀* is known in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationInstance {
    pub z: Vec<f64>,
    pub curvature: Vec<f64>,
    pub lambda: f64,
    pub half_width: f64,
    pub x_star: Vec<f64>,
    pub psi_star: f64,
}

impl VerificationInstance {
    /// Unit curvature (L = 1), `z` uniform in [−1, 1]ⁿ.
    pub fn new(n: usize, seed: u64, lambda: f64) -> Result<Self> {
        Self::with_curvature(n, seed, lambda, 1.0, 1.0)
    }

    /// Curvatures spread evenly over [μ, L].
    pub fn with_curvature(n: usize, seed: u64, lambda: f64, mu: f64, l: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if !(mu > 0.0 && l >= mu) {
            return Err(Error::invalid("mu", format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::invalid("l1", "must be >= 0"));
        }
        let mut rng = stream(seed, Stream::Instance);
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let curvature: Vec<f64> = (0..n)
            .map(|i| if n == 1 { l } else { mu + (l - mu) * i as f64 / (n - 1) as f64 })
            .collect();
        Ok(Self::from_parts(z, curvature, lambda))
    }

    pub fn from_parts(z: Vec<f64>, curvature: Vec<f64>, lambda: f64) -> Self {
        let x_star: Vec<f64> = z
            .iter()
            .zip(&curvature)
            .map(|(zi, di)| soft_threshold(*zi, lambda / di))
            .collect();
        let psi_star = x_star
            .iter()
            .zip(z.iter().zip(&curvature))
            .map(|(x, (zi, di))| 0.5 * di * (x - zi).powi(2) + lambda * x.abs())
            .sum();
        let half_width = z.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
        VerificationInstance {
            z,
            curvature,
            lambda,
            half_width,
            x_star,
            psi_star,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn smoothness(&self) -> f64 {
        self.curvature.iter().cloned().fold(0.0, f64::max)
    }

    pub fn strong_convexity(&self) -> f64 {
        self.curvature.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn psi0(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.z.iter().zip(&self.curvature))
            .map(|(x, (zi, di))| 0.5 * di * (x - zi).powi(2) + self.lambda * x.abs())
            .sum()
    }

    pub fn set(&self) -> FeasibleSet {
        FeasibleSet::cube(self.dim(), self.half_width).expect("positive half width")
    }

    pub fn problem(&self, oracle: &OracleSettings, seed: u64) -> Result<CompositeProblem> {
        let n = self.dim();
        let (z1, d1) = (self.z.clone(), self.curvature.clone());
        let (z2, d2) = (self.z.clone(), self.curvature.clone());
        let g = SmoothTerm {
            value: Arc::new(move |x: &[f64]| {
                x.iter().zip(z1.iter().zip(&d1)).map(|(x, (z, d))| 0.5 * d * (x - z).powi(2)).sum()
            }),
            grad: Arc::new(move |x: &[f64]| x.iter().zip(z2.iter().zip(&d2)).map(|(x, (z, d))| d * (x - z)).collect()),
            lipschitz: self.smoothness(),
            strong_convexity: self.strong_convexity(),
        };
        let setup = ProximalSetup::euclidean(self.set());
        Ok(CompositeProblem::new(setup, g, l1_term(self.lambda, n), oracle, seed)?.with_reference(self.psi_star))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_optimum_is_z() {
        let v = VerificationInstance::new(5, 3, 0.0).unwrap();
        assert_eq!(v.x_star, v.z);
        assert_eq!(v.psi_star, 0.0);
    }

    #[test]
    fn scalar_soft_threshold() {
        let v = VerificationInstance::from_parts(vec![1.0], vec![1.0], 0.3);
        assert!((v.x_star[0] - 0.7).abs() < 1e-15);
        assert!((v.psi_star - 0.255).abs() < 1e-15);
    }

    #[test]
    fn optimum_beats_random_feasible_points() {
        let v = VerificationInstance::new(6, 11, 0.2).unwrap();
        let mut rng = stream(5, Stream::Start);
        let set = v.set();
        assert!(set.contains(&v.x_star, 0.0));
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-v.half_width..v.half_width)).collect();
            assert!(v.psi0(&x) >= v.psi_star);
        }
    }

    #[test]
    fn problem_agrees_with_closed_form() {
        let v = VerificationInstance::with_curvature(4, 2, 0.1, 0.1, 1.0).unwrap();
        let p = v
            .problem(&OracleSettings { noise: crate::oracles::NoiseKind::Zero, r: 1e-3, s: None, p_star: None }, 0)
            .unwrap();
        let x = vec![0.3, -0.2, 0.0, 0.9];
        assert!((p.psi0(&x) - v.psi0(&x)).abs() < 1e-14);
        assert_eq!(p.g.lipschitz, 1.0);
        assert!((p.g.strong_convexity - 0.1).abs() < 1e-15);
        let g = crate::problems::fd::gradient(&*p.g.value, &x, 1e-6);
        assert!(crate::problems::fd::rel_err(&(p.g.grad)(&x), &g) < 1e-8);
    }
}
