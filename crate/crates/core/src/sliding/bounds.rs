use crate::error::{Error, Result};
use crate::geometry::ProximalSetup;
use crate::oracles::SmoothingEstimator;

use super::schedule::SlidingSchedule;

/// Constants entering the expected-gap bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub r: f64,
    pub m: f64,
    pub n: usize,
    pub delta: f64,
    pub d_x: f64,
    pub d_xv: f64,
    pub p_star: f64,
    pub l: f64,
}

impl BoundTerms {
    pub fn from_parts(sched: &SlidingSchedule, setup: &ProximalSetup, est: &SmoothingEstimator) -> Self {
        BoundTerms {
            r: est.r,
            m: est.oracle.lipschitz_m,
            n: est.n,
            delta: est.oracle.delta(),
            d_x: setup.d_x,
            d_xv: setup.d_xv,
            p_star: est.p_star,
            l: sched.l,
        }
    }

    /// `n Δ D_X p* / r`, taken as 0 when Δ = 0 (including the r → 0 limit).
    pub fn noise_floor(&self) -> f64 {
        if self.delta == 0.0 {
            0.0
        } else {
            self.n as f64 * self.delta * self.d_x * self.p_star / self.r
        }
    }

    pub fn smoothing_bias(&self) -> f64 {
        2.0 * self.r * self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundAt {
    /// After N outer iterations of the convex method.
    Convex { n_outer: usize },
    /// After phase i of the restarted method.
    Phase { phase: usize, rho0: f64 },
}

/// Right-hand side of the expected Ψ₀-gap bound:
/// `2rM + 12 L D²_{X,V} / (N(N+1)) + nΔD_X p*/r` for the convex method and
/// `2rM + ρ₀/2ⁱ + 2nΔD_X p*/r` after restart phase i.
pub fn theoretical_bound(terms: &BoundTerms, at: BoundAt) -> f64 {
    match at {
        BoundAt::Convex { n_outer } => {
            let n = n_outer as f64;
            let main = if n_outer == 0 {
                f64::INFINITY
            } else {
                12.0 * terms.l * terms.d_xv * terms.d_xv / (n * (n + 1.0))
            };
            terms.smoothing_bias() + main + terms.noise_floor()
        }
        BoundAt::Phase { phase, rho0 } => {
            terms.smoothing_bias() + rho0 / 2f64.powi(phase as i32) + 2.0 * terms.noise_floor()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSuggestion {
    pub r: f64,
    pub delta_max: f64,
    pub s_min: f64,
}

/// Smoothing radius and admissible noise for target accuracy `eps`:
/// `r = ε/(4M)` so the `2rM` term takes at most ε/2,
/// `Δ_max = ε² / (8 n M D_X min(p*, 1))`, `s_min = r/C₃ · (1 + 10⁻⁶)`.
pub fn suggest_r_delta(eps: f64, m: f64, n: usize, d_x: f64, p_star: f64, c3: f64) -> Result<SmoothingSuggestion> {
    for (name, v) in [("eps", eps), ("M", m), ("D_X", d_x), ("p_star", p_star), ("C3", c3)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be positive and finite, got {v}"),
            });
        }
    }
    let r = eps / (4.0 * m);
    Ok(SmoothingSuggestion {
        r,
        delta_max: eps * eps / (8.0 * n as f64 * m * d_x * p_star.min(1.0)),
        s_min: r / c3 * (1.0 + 1e-6),
    })
}
