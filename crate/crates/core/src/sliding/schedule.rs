use crate::error::{Error, Result};

/// Parameter sequences driving the outer loop and the prox-sliding inner loop.
pub trait StepSchedule {
    /// Outer iteration limit N.
    fn outer_iterations(&self) -> usize;
    /// Prox weight `p_t`, t >= 1.
    fn p(&self, t: usize) -> f64;
    /// Inner averaging weight `θ_t`, t >= 1.
    fn theta(&self, t: usize) -> f64;
    fn beta(&self, k: usize) -> f64;
    fn gamma(&self, k: usize) -> f64;
    /// Inner iteration count `T_k`.
    fn inner_iterations(&self, k: usize) -> usize;
}

/// `P_t = 2 / ((t+1)(t+2))`, the closed form of `P_t = p_t/(1+p_t) P_{t-1}`, `P_0 = 1`.
pub fn big_p(t: usize) -> f64 {
    let t = t as f64;
    2.0 / ((t + 1.0) * (t + 2.0))
}

/// `Γ_k = 2 / (k(k+1))`, the closed form of `Γ_k = (1 − γ_k) Γ_{k−1}`, `Γ_1 = 1`.
pub fn big_gamma(k: usize) -> f64 {
    let k = k as f64;
    2.0 / (k * (k + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleValues {
    pub p_t: f64,
    pub theta_t: f64,
    pub big_p_t: f64,
    pub beta_k: f64,
    pub gamma_k: f64,
    pub big_gamma_k: f64,
    pub t_k: usize,
}

/// Inputs for the default schedule. `m_est` is the ℓ₂ bound on ∇f and
/// `delta`/`r` the oracle noise level and smoothing radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleInputs {
    pub l: f64,
    pub mu: f64,
    pub m_est: f64,
    pub dim: usize,
    pub c1: f64,
    pub p_star: f64,
    pub delta: f64,
    pub r: f64,
    pub d_tilde: f64,
    pub n_outer: usize,
    pub t_cap: usize,
    pub c_const: f64,
    pub big_c_const: f64,
}

pub const DEFAULT_T_CAP: usize = 1_000_000;

/// `p_t = t/2`, `θ_t = 2(t+1)/(t(t+3))`, `β_k = 2L/k`, `γ_k = 2/(k+1)`,
/// `T_k = ⌈N (M̃² + σ²) k² / (D̃ L²)⌉` clamped to `[1, t_cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingSchedule {
    pub l: f64,
    pub mu: f64,
    pub m_est: f64,
    pub sigma_sq: f64,
    pub m_tilde: f64,
    pub d_tilde: f64,
    pub n_outer: usize,
    pub t_cap: usize,
    pub c_const: f64,
    pub big_c_const: f64,
}

impl SlidingSchedule {
    pub fn new(inp: ScheduleInputs) -> Result<Self> {
        let n = inp.dim as f64;
        let m_tilde = inp.c_const * n.sqrt() * inp.c1 * inp.m_est;
        let noise_term = if inp.delta == 0.0 {
            0.0
        } else {
            n * n * inp.delta * inp.delta / (inp.r * inp.r)
        };
        let sigma_sq = 4.0 * inp.p_star * inp.p_star * (inp.big_c_const * n * inp.m_est * inp.m_est + noise_term);
        let sched = SlidingSchedule {
            l: inp.l,
            mu: inp.mu,
            m_est: inp.m_est,
            sigma_sq,
            m_tilde,
            d_tilde: inp.d_tilde,
            n_outer: inp.n_outer,
            t_cap: inp.t_cap,
            c_const: inp.c_const,
            big_c_const: inp.big_c_const,
        };
        sched.validate()?;
        Ok(sched)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::invalid("L", format!("must be positive, got {}", self.l)));
        }
        if !(self.d_tilde > 0.0 && self.d_tilde.is_finite()) {
            return Err(Error::invalid("D_tilde", format!("must be positive, got {}", self.d_tilde)));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::invalid("mu", format!("must be >= 0, got {}", self.mu)));
        }
        if self.t_cap == 0 {
            return Err(Error::invalid("T_cap", "must be >= 1"));
        }
        if !(self.sigma_sq >= 0.0 && self.m_tilde >= 0.0) {
            return Err(Error::invalid("M_est", "variance constants must be >= 0"));
        }
        Ok(())
    }

    pub fn with_outer(&self, n_outer: usize, d_tilde: f64) -> Self {
        SlidingSchedule {
            n_outer,
            d_tilde,
            ..self.clone()
        }
    }

    fn raw_inner(&self, k: usize) -> f64 {
        let k = k as f64;
        self.n_outer as f64 * (self.m_tilde.powi(2) + self.sigma_sq) * k * k / (self.d_tilde * self.l * self.l)
    }

    /// Whether `T_k` was clamped by `t_cap` at iteration k.
    pub fn cap_binds(&self, k: usize) -> bool {
        self.raw_inner(k).ceil() > self.t_cap as f64
    }

    pub fn values(&self, k: usize, t: usize) -> Result<ScheduleValues> {
        self.validate()?;
        if k == 0 {
            return Err(Error::invalid("k", "outer index starts at 1"));
        }
        // t = 0 only carries P_0 = 1; p_0 is unused and reported as 0.
        let (p_t, theta_t) = if t == 0 { (0.0, 1.0) } else { (self.p(t), self.theta(t)) };
        Ok(ScheduleValues {
            p_t,
            theta_t,
            big_p_t: big_p(t),
            beta_k: self.beta(k),
            gamma_k: self.gamma(k),
            big_gamma_k: big_gamma(k),
            t_k: self.inner_iterations(k),
        })
    }

    /// Largest N whose total zeroth-order cost `2 Σ_k T_k` stays within `budget`.
    pub fn fit_outer_to_zo_budget(&self, budget: u64) -> usize {
        let cost = |n: usize| -> u64 {
            let s = self.with_outer(n, self.d_tilde);
            (1..=n).map(|k| 2 * s.inner_iterations(k) as u64).sum()
        };
        if cost(1) > budget {
            return 1;
        }
        let mut lo = 1;
        let mut hi = 2;
        while cost(hi) <= budget {
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if cost(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl StepSchedule for SlidingSchedule {
    fn outer_iterations(&self) -> usize {
        self.n_outer
    }

    fn p(&self, t: usize) -> f64 {
        t as f64 / 2.0
    }

    fn theta(&self, t: usize) -> f64 {
        let t = t as f64;
        2.0 * (t + 1.0) / (t * (t + 3.0))
    }

    fn beta(&self, k: usize) -> f64 {
        2.0 * self.l / k as f64
    }

    fn gamma(&self, k: usize) -> f64 {
        2.0 / (k as f64 + 1.0)
    }

    fn inner_iterations(&self, k: usize) -> usize {
        let raw = self.raw_inner(k).ceil();
        if raw.is_nan() || raw >= self.t_cap as f64 {
            self.t_cap
        } else {
            (raw as usize).max(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn schedule(n_outer: usize) -> SlidingSchedule {
        SlidingSchedule::new(ScheduleInputs {
            l: 1.0,
            mu: 0.0,
            m_est: 1.0,
            dim: 4,
            c1: 1.0,
            p_star: 1.0,
            delta: 0.0,
            r: 0.01,
            d_tilde: 3.0,
            n_outer,
            t_cap: DEFAULT_T_CAP,
            c_const: 1.0,
            big_c_const: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn first_values() {
        let s = schedule(10);
        let v0 = s.values(1, 0).unwrap();
        assert_eq!(v0.big_p_t, 1.0);
        let v1 = s.values(1, 1).unwrap();
        assert_eq!(v1.p_t, 0.5);
        assert!((v1.big_p_t - 1.0 / 3.0).abs() < 1e-15);
        assert!((v1.theta_t - 1.0).abs() < 1e-15);
        assert_eq!(v1.gamma_k, 1.0);
        assert_eq!(v1.big_gamma_k, 1.0);
    }

    #[test]
    fn closed_forms_match_recursions() {
        let s = schedule(10);
        let mut p_prev = 1.0;
        for t in 1..=10_000 {
            let p = s.p(t);
            let rec = p / (1.0 + p) * p_prev;
            assert!((rec - big_p(t)).abs() <= 1e-12);
            let theta = (big_p(t - 1) - big_p(t)) / ((1.0 - big_p(t)) * big_p(t - 1));
            assert!((theta - s.theta(t)).abs() <= 1e-12, "t = {t}");
            p_prev = rec;
        }
        let mut g_prev = 1.0;
        for k in 2..=1000 {
            let rec = (1.0 - s.gamma(k)) * g_prev;
            assert!((rec - big_gamma(k)).abs() <= 1e-12);
            g_prev = rec;
        }
    }

    #[test]
    fn inner_counts_are_clamped() {
        let mut s = schedule(10);
        assert!(s.inner_iterations(1) >= 1);
        s.t_cap = 5;
        assert_eq!(s.inner_iterations(10), 5);
        assert!(s.cap_binds(10));
        s.sigma_sq = 0.0;
        s.m_tilde = 0.0;
        assert_eq!(s.inner_iterations(3), 1);
    }

    #[test]
    fn invalid_constants_are_rejected() {
        let mut s = schedule(3);
        s.l = 0.0;
        assert!(s.values(1, 1).is_err());
        let mut s = schedule(3);
        s.d_tilde = -1.0;
        assert!(s.values(1, 1).is_err());
    }

    #[test]
    fn budget_fit_is_tight() {
        let s = schedule(1);
        let n = s.fit_outer_to_zo_budget(100_000);
        let cost = |n: usize| -> u64 {
            let s = s.with_outer(n, s.d_tilde);
            (1..=n).map(|k| 2 * s.inner_iterations(k) as u64).sum()
        };
        assert!(cost(n) <= 100_000 && cost(n + 1) > 100_000);
    }
}
