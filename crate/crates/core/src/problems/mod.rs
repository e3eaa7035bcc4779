//! Objective families used by the experiments and the acceptance suite.

mod geom_median;
mod libsvm;
mod logreg;
mod nesterov;
mod verification;

use std::sync::Arc;

pub use geom_median::{weiszfeld, GeometricMedianInstance};
pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm};
pub use logreg::{LogRegLassoInstance, SparseMatrix};
pub use nesterov::NesterovLassoInstance;
pub use verification::VerificationInstance;

use crate::oracles::{GradFn, ValueFn};
use crate::sliding::NonsmoothTerm;

/// `λ‖x‖₁` with the minimal-norm subgradient (0 at the kink).
pub fn l1_term(lambda: f64, n: usize) -> NonsmoothTerm {
    let value: ValueFn = Arc::new(move |x: &[f64]| lambda * crate::linalg::norm1(x));
    let subgrad: GradFn = Arc::new(move |x: &[f64]| x.iter().map(|v| lambda * sign0(*v)).collect());
    NonsmoothTerm {
        value,
        subgrad: Some(subgrad),
        lipschitz: lambda * (n as f64).sqrt(),
    }
}

pub(crate) fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    sign0(v) * (v.abs() - t).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxGradResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub steps: usize,
}

/// Proximal gradient for `g(x) + λ‖x‖₁` with step `1/L`; stops after
/// `max_steps` or once an iteration moves less than `tol` in ℓ∞.
pub fn prox_grad_l1(
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    value: &dyn Fn(&[f64]) -> f64,
    l: f64,
    lambda: f64,
    x0: &[f64],
    max_steps: usize,
    tol: f64,
) -> ProxGradResult {
    let step = 1.0 / l;
    let mut x = x0.to_vec();
    let mut steps = 0;
    while steps < max_steps {
        steps += 1;
        let gr = grad(&x);
        let mut moved: f64 = 0.0;
        for (xi, gi) in x.iter_mut().zip(&gr) {
            let next = soft_threshold(*xi - step * gi, step * lambda);
            moved = moved.max((next - *xi).abs());
            *xi = next;
        }
        if moved < tol {
            break;
        }
    }
    let v = value(&x) + lambda * crate::linalg::norm1(&x);
    ProxGradResult { x, value: v, steps }
}
