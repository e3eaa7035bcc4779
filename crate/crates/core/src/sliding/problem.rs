use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::geometry::ProximalSetup;
use crate::oracles::{GradFn, NoiseKind, NoiseModel, NoisyZeroOrderOracle, SmoothingEstimator, ValueFn};
use crate::rng::{stream, Stream};
use crate::trace::Counters;

/// The L-smooth part g, reached through its first-order oracle.
#[derive(Clone)]
pub struct SmoothTerm {
    /// Exact g(x). Used for measurement only.
    pub value: ValueFn,
    pub grad: GradFn,
    pub lipschitz: f64,
    /// Strong convexity modulus with respect to the Bregman divergence (0 if none).
    pub strong_convexity: f64,
}

/// The non-smooth part f. Solvers only see it through the noisy oracle;
/// `subgrad` exists for the first-order baseline.
#[derive(Clone)]
pub struct NonsmoothTerm {
    pub value: ValueFn,
    pub subgrad: Option<GradFn>,
    /// ℓ₂ Lipschitz bound M.
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub noise: NoiseKind,
    pub r: f64,
    /// Neighbourhood radius; defaults to just above `r / C3`.
    pub s: Option<f64>,
    pub p_star: Option<f64>,
}

/// Hooks installed when the problem is a penalized network problem.
#[derive(Clone)]
pub struct NetworkHooks {
    pub comm_rounds: Arc<AtomicU64>,
    /// `⟨x, W x⟩`, not counted as communication.
    pub consensus_sq_norm: ValueFn,
}

/// Ψ₀ = f + g over a proximal setup, with call accounting.
#[derive(Clone)]
pub struct CompositeProblem {
    pub setup: ProximalSetup,
    pub g: SmoothTerm,
    pub f: NonsmoothTerm,
    pub estimator: SmoothingEstimator,
    pub psi0_reference: Option<f64>,
    pub network: Option<NetworkHooks>,
    pub seed: u64,
    /// Free-form facts recorded into run metadata.
    pub notes: Vec<(String, String)>,
    fo_calls: u64,
    extra_zo_calls: u64,
}

impl CompositeProblem {
    pub fn new(
        setup: ProximalSetup,
        g: SmoothTerm,
        f: NonsmoothTerm,
        oracle: &OracleSettings,
        seed: u64,
    ) -> Result<Self> {
        if !(g.lipschitz > 0.0 && g.lipschitz.is_finite()) {
            return Err(Error::invalid("L", format!("must be positive, got {}", g.lipschitz)));
        }
        let n = setup.dim();
        let s = oracle.s.unwrap_or(oracle.r / setup.norms.c3 * (1.0 + 1e-6));
        let noise = NoiseModel::new(oracle.noise.clone(), stream(seed, Stream::Noise))?;
        let zo = NoisyZeroOrderOracle::new(f.value.clone(), noise, f.lipschitz, s)?;
        let estimator = SmoothingEstimator::new(
            zo,
            oracle.r,
            n,
            setup.norms,
            oracle.p_star,
            stream(seed, Stream::Sphere),
        )?;
        let mut notes = Vec::new();
        if !setup.set.is_compact() {
            notes.push((
                "nonconforming_set".to_string(),
                format!("whole_space with bound_hint {} standing in for D_X", setup.d_x),
            ));
        }
        Ok(CompositeProblem {
            setup,
            g,
            f,
            estimator,
            psi0_reference: None,
            network: None,
            seed,
            notes,
            fo_calls: 0,
            extra_zo_calls: 0,
        })
    }

    pub fn with_reference(mut self, psi0_star: f64) -> Self {
        self.psi0_reference = Some(psi0_star);
        self
    }

    pub fn dim(&self) -> usize {
        self.setup.dim()
    }

    /// One counted first-order oracle call for g.
    pub fn grad_g(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        self.fo_calls += 1;
        Ok((self.g.grad)(x))
    }

    /// Ψ₀(x) from the clean f; no counters move.
    pub fn psi0(&self, x: &[f64]) -> f64 {
        (self.f.value)(x) + (self.g.value)(x)
    }

    pub fn consensus_sq_norm(&self, x: &[f64]) -> Option<f64> {
        self.network.as_ref().map(|h| (h.consensus_sq_norm)(x))
    }

    pub fn comm_rounds(&self) -> u64 {
        self.network
            .as_ref()
            .map(|h| h.comm_rounds.load(Ordering::Relaxed))
            .unwrap_or(0)
    }

    pub fn counters(&self) -> Counters {
        Counters {
            fo_calls: self.fo_calls,
            zo_calls: self.estimator.zo_calls() + self.extra_zo_calls,
            comm_rounds: self.comm_rounds(),
        }
    }

    /// Counts value queries made through an estimator other than `self.estimator`.
    pub fn add_zo_calls(&mut self, calls: u64) {
        self.extra_zo_calls += calls;
    }

    /// Counts one communication round for work done outside `grad_g`.
    pub fn charge_comm_round(&self) {
        if let Some(h) = &self.network {
            h.comm_rounds.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn delta(&self) -> f64 {
        self.estimator.oracle.delta()
    }

    /// A fresh oracle over the whole objective Ψ₀ = f + g with smoothing
    /// radius `r`, this problem's noise model, and an independent copy of its
    /// random streams. Communication for g values is not counted here.
    pub fn full_objective_estimator(&self, r: f64) -> Result<SmoothingEstimator> {
        let f = self.f.value.clone();
        let g = self.g.value.clone();
        let psi: ValueFn = Arc::new(move |x: &[f64]| f(x) + g(x));
        let base = &self.estimator;
        let noise = NoiseModel::new(base.oracle.noise_kind().clone(), stream(self.seed, Stream::Noise))?;
        let s = base.oracle.s.max(r / base.norms.c3 * (1.0 + 1e-6));
        let m_psi = base.oracle.lipschitz_m + self.g.lipschitz * self.setup.d_x;
        let oracle = NoisyZeroOrderOracle::new(psi, noise, m_psi, s)?;
        SmoothingEstimator::new(
            oracle,
            r,
            base.n,
            base.norms,
            Some(base.p_star),
            stream(self.seed, Stream::Sphere),
        )
    }

    /// Spot check of `‖∇g(x) − ∇g(y)‖_* <= slack · L ‖x − y‖` on given pairs.
    pub fn check_smoothness(&self, pairs: &[(Vec<f64>, Vec<f64>)], slack: f64) -> bool {
        let norms = self.setup.norms;
        pairs.iter().all(|(x, y)| {
            let dg = crate::linalg::sub(&(self.g.grad)(x), &(self.g.grad)(y));
            norms.dual(&dg) <= slack * self.g.lipschitz * norms.primal(&crate::linalg::sub(x, y)) + 1e-12
        })
    }
}

impl CompositeProblem {
    /// The default schedule for this problem: `D̃ = 3 D²_{X,V} / 4`,
    /// constants c = C = 1, `T_cap` = 10⁶.
    pub fn default_schedule(&self, n_outer: usize) -> Result<super::SlidingSchedule> {
        let est = &self.estimator;
        super::SlidingSchedule::new(super::ScheduleInputs {
            l: self.g.lipschitz,
            mu: self.g.strong_convexity,
            m_est: self.f.lipschitz,
            dim: self.dim(),
            c1: self.setup.norms.c1,
            p_star: est.p_star,
            delta: self.delta(),
            r: est.r,
            d_tilde: 0.75 * self.setup.d_xv * self.setup.d_xv,
            n_outer,
            t_cap: super::DEFAULT_T_CAP,
            c_const: 1.0,
            big_c_const: 1.0,
        })
    }
}
