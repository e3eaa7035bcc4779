use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist2, sub};
use crate::oracles::{GradFn, ValueFn};
use crate::rng::{stream, Stream};

/// Anchors `b_i ~ N(1, 2I)` for a decentralized geometric-median problem:
/// node i holds `f_i(x) = ‖x − b_i‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMedianInstance {
    pub m: usize,
    pub n: usize,
    pub anchors: Vec<Vec<f64>>,
    pub seed: u64,
}

impl GeometricMedianInstance {
    pub fn generate(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("m", format!("need m, n >= 1, got m = {m}, n = {n}")));
        }
        let mut rng = stream(seed, Stream::Anchors);
        let anchors = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        1.0 + std::f64::consts::SQRT_2 * z
                    })
                    .collect()
            })
            .collect();
        Ok(GeometricMedianInstance { m, n, anchors, seed })
    }

    pub fn from_anchors(anchors: Vec<Vec<f64>>) -> Result<Self> {
        let n = anchors.first().map(|a| a.len()).unwrap_or(0);
        if n == 0 {
            return Err(Error::invalid("anchors", "need at least one non-empty anchor"));
        }
        for a in &anchors {
            check_dim(n, a.len())?;
        }
        Ok(GeometricMedianInstance {
            m: anchors.len(),
            n,
            anchors,
            seed: 0,
        })
    }

    pub fn node_value(&self, i: usize, x: &[f64]) -> f64 {
        dist2(x, &self.anchors[i])
    }

    /// `(x − b)/‖x − b‖`, or 0 at `x = b`.
    pub fn node_subgrad(&self, i: usize, x: &[f64]) -> Vec<f64> {
        node_subgrad(&self.anchors[i], x)
    }

    pub fn node_functions(&self) -> Vec<(ValueFn, GradFn)> {
        self.anchors
            .iter()
            .map(|b| {
                let (b1, b2) = (b.clone(), b.clone());
                let v: ValueFn = Arc::new(move |x: &[f64]| dist2(x, &b1));
                let g: GradFn = Arc::new(move |x: &[f64]| node_subgrad(&b2, x));
                (v, g)
            })
            .collect()
    }

    /// `(1/m) Σ ‖x − b_i‖` at a common point.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.anchors.iter().map(|b| dist2(x, b)).sum::<f64>() / self.m as f64
    }

    pub fn mean_anchor(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        for b in &self.anchors {
            for (ci, bi) in c.iter_mut().zip(b) {
                *ci += bi / self.m as f64;
            }
        }
        c
    }
}

fn node_subgrad(b: &[f64], x: &[f64]) -> Vec<f64> {
    let d = sub(x, b);
    let norm = crate::linalg::norm2(&d);
    if norm == 0.0 {
        vec![0.0; d.len()]
    } else {
        d.into_iter().map(|v| v / norm).collect()
    }
}

/// Weiszfeld iterations from the anchor mean. Returns the point and its
/// objective value.
pub fn weiszfeld(inst: &GeometricMedianInstance, max_iter: usize, tol: f64) -> (Vec<f64>, f64) {
    let mut x = inst.mean_anchor();
    for _ in 0..max_iter {
        let mut num = vec![0.0; inst.n];
        let mut den = 0.0;
        let mut hit_anchor = false;
        for b in &inst.anchors {
            let d = dist2(&x, b);
            if d < 1e-14 {
                hit_anchor = true;
                break;
            }
            for (ni, bi) in num.iter_mut().zip(b) {
                *ni += bi / d;
            }
            den += 1.0 / d;
        }
        if hit_anchor {
            break;
        }
        let next: Vec<f64> = num.into_iter().map(|v| v / den).collect();
        let moved = dist2(&next, &x);
        x = next;
        if moved < tol {
            break;
        }
    }
    let v = inst.objective(&x);
    (x, v)
}
