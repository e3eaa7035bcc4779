//! Noisy zeroth-order oracle and the two-point sphere-smoothing gradient estimator.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::geometry::NormPair;
use crate::linalg::{all_finite, dot};
use crate::rng::StreamRng;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
/// Draws `f(x, ξ)` for a fresh ξ; must satisfy `E_ξ f(x, ξ) = f(x)`.
pub type SampleFn = Arc<dyn Fn(&[f64], &mut StreamRng) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    Zero,
    /// i.i.d. U[−Δ, Δ] per query.
    Uniform { delta: f64 },
    /// Δ·sin(⟨ω, x⟩), deterministic in x.
    AdversarialSine { delta: f64, omega: Vec<f64> },
}

impl NoiseKind {
    pub fn bound(&self) -> f64 {
        match self {
            NoiseKind::Zero => 0.0,
            NoiseKind::Uniform { delta } | NoiseKind::AdversarialSine { delta, .. } => *delta,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    rng: StreamRng,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, rng: StreamRng) -> Result<Self> {
        let d = kind.bound();
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::invalid("delta", format!("must be finite and >= 0, got {d}")));
        }
        Ok(NoiseModel { kind, rng })
    }

    pub fn zero() -> Self {
        NoiseModel {
            kind: NoiseKind::Zero,
            rng: crate::rng::stream(0, crate::rng::Stream::Noise),
        }
    }

    pub fn sample(&mut self, x: &[f64]) -> f64 {
        match &self.kind {
            NoiseKind::Zero => 0.0,
            NoiseKind::Uniform { delta } => {
                if *delta == 0.0 {
                    0.0
                } else {
                    self.rng.random_range(-*delta..=*delta)
                }
            }
            NoiseKind::AdversarialSine { delta, omega } => {
                delta * dot(omega, x).sin()
            }
        }
    }
}

/// One oracle answer with the ξ-sample value it was built from.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub noisy: f64,
    pub sampled: f64,
}

/// Returns `f(x, ξ) + Δ(x)` with `|Δ(x)| <= Δ` and counts every query.
#[derive(Clone)]
pub struct NoisyZeroOrderOracle {
    f_clean: ValueFn,
    stochastic: Option<(SampleFn, StreamRng)>,
    noise: NoiseModel,
    /// ℓ₂ bound on the (sub)gradient of f over the s-neighbourhood.
    pub lipschitz_m: f64,
    /// Radius of the neighbourhood of the feasible set where f may be queried.
    pub s: f64,
    calls: u64,
}

impl std::fmt::Debug for NoisyZeroOrderOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoisyZeroOrderOracle")
            .field("noise", &self.noise.kind)
            .field("lipschitz_m", &self.lipschitz_m)
            .field("s", &self.s)
            .field("calls", &self.calls)
            .finish()
    }
}

impl NoisyZeroOrderOracle {
    pub fn new(f_clean: ValueFn, noise: NoiseModel, lipschitz_m: f64, s: f64) -> Result<Self> {
        if !(lipschitz_m >= 0.0 && lipschitz_m.is_finite()) {
            return Err(Error::invalid("M", format!("must be finite and >= 0, got {lipschitz_m}")));
        }
        if !(s > 0.0) {
            return Err(Error::invalid("s", format!("must be positive, got {s}")));
        }
        Ok(NoisyZeroOrderOracle {
            f_clean,
            stochastic: None,
            noise,
            lipschitz_m,
            s,
            calls: 0,
        })
    }

    pub fn with_stochastic(mut self, sampler: SampleFn, rng: StreamRng) -> Self {
        self.stochastic = Some((sampler, rng));
        self
    }

    pub fn delta(&self) -> f64 {
        self.noise.kind.bound()
    }

    pub fn noise_kind(&self) -> &NoiseKind {
        &self.noise.kind
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Exact `f(x)`; never counted.
    pub fn clean(&self, x: &[f64]) -> f64 {
        (self.f_clean)(x)
    }

    pub fn clean_fn(&self) -> ValueFn {
        Arc::clone(&self.f_clean)
    }

    pub fn eval(&mut self, x: &[f64]) -> f64 {
        self.eval_detailed(x).noisy
    }

    pub fn eval_detailed(&mut self, x: &[f64]) -> Evaluation {
        self.calls += 1;
        let sampled = match &mut self.stochastic {
            Some((sampler, rng)) => sampler(x, rng),
            None => (self.f_clean)(x),
        };
        Evaluation {
            noisy: sampled + self.noise.sample(x),
            sampled,
        }
    }
}

/// Uniform direction on the unit sphere in ℝⁿ (normalized Gaussian).
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "sphere dimension must be >= 1"));
    }
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = crate::linalg::norm2(&g);
        if norm > 1e-150 {
            return Ok(g.into_iter().map(|v| v / norm).collect());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasEstimate {
    /// Dual norm of the mean difference between the noisy estimator and the clean one.
    pub bias: f64,
    /// Dual norm of the componentwise standard errors of that mean.
    pub stderr: f64,
}

/// Two-point estimator `(n / 2r)(f̃(x + re) − f̃(x − re)) e` of the gradient of
/// the sphere-smoothed `F(x) = E_e f(x + re)`.
#[derive(Debug, Clone)]
pub struct SmoothingEstimator {
    pub oracle: NoisyZeroOrderOracle,
    pub r: f64,
    pub n: usize,
    pub norms: NormPair,
    pub p_star: f64,
    rng: StreamRng,
}

impl SmoothingEstimator {
    /// `p_star = None` picks the norm's default.
    pub fn new(
        oracle: NoisyZeroOrderOracle,
        r: f64,
        n: usize,
        norms: NormPair,
        p_star: Option<f64>,
        rng: StreamRng,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "dimension must be >= 1"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        if !(r < oracle.s * norms.c3) {
            return Err(Error::invalid(
                "r",
                format!("r = {r} must be below s * C3 = {}", oracle.s * norms.c3),
            ));
        }
        let p_star = p_star.unwrap_or_else(|| norms.default_p_star(n));
        Ok(SmoothingEstimator {
            oracle,
            r,
            n,
            norms,
            p_star,
            rng,
        })
    }

    pub fn zo_calls(&self) -> u64 {
        self.oracle.calls()
    }

    /// One fresh direction, two oracle calls.
    pub fn estimate(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let e = sample_sphere(self.n, &mut self.rng)?;
        self.estimate_along(x, &e)
    }

    pub fn estimate_along(&mut self, x: &[f64], e: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, e.len())?;
        let (plus, minus) = self.shifted(x, e);
        let fp = self.oracle.eval(&plus);
        let fm = self.oracle.eval(&minus);
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFiniteOracle {
                x: x.to_vec(),
                e: e.to_vec(),
            });
        }
        let scale = self.n as f64 / (2.0 * self.r) * (fp - fm);
        Ok(e.iter().map(|v| scale * v).collect())
    }

    fn shifted(&self, x: &[f64], e: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let plus = x.iter().zip(e).map(|(a, b)| a + self.r * b).collect();
        let minus = x.iter().zip(e).map(|(a, b)| a - self.r * b).collect();
        (plus, minus)
    }

    /// Monte-Carlo estimate of `F(x)` from the clean f. Diagnostic only: uses
    /// the caller's generator and leaves the call counter untouched.
    pub fn smoothed_value<R: Rng + ?Sized>(&self, x: &[f64], samples: usize, rng: &mut R) -> Result<McEstimate> {
        check_dim(self.n, x.len())?;
        if samples == 0 {
            return Err(Error::invalid("samples", "must be >= 1"));
        }
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut point = vec![0.0; self.n];
        for _ in 0..samples {
            let e = sample_sphere(self.n, rng)?;
            for i in 0..self.n {
                point[i] = x[i] + self.r * e[i];
            }
            let v = self.oracle.clean(&point);
            sum += v;
            sum_sq += v * v;
        }
        Ok(mean_and_stderr(sum, sum_sq, samples))
    }

    /// Dual-norm distance between the mean of `samples` noisy estimates and the
    /// clean reference for `∇F(x)`.
    ///
    /// Each noisy estimate is paired with the clean antithetic estimate
    /// `(n/2r)(f(x+re) − f(x−re))e` on the same direction; its expectation is
    /// `E_e[(n/r) f(x+re) e] = ∇F(x)`, and pairing cancels the shared variance.
    pub fn estimator_bias_norm(&mut self, x: &[f64], samples: usize) -> Result<BiasEstimate> {
        check_dim(self.n, x.len())?;
        if samples < 1000 {
            return Err(Error::invalid("samples", format!("need at least 1000, got {samples}")));
        }
        let n = self.n;
        let mut sum = vec![0.0; n];
        let mut sum_sq = vec![0.0; n];
        for _ in 0..samples {
            let e = sample_sphere(n, &mut self.rng)?;
            let noisy = self.estimate_along(x, &e)?;
            let (plus, minus) = self.shifted(x, &e);
            let clean_scale = n as f64 / (2.0 * self.r) * (self.oracle.clean(&plus) - self.oracle.clean(&minus));
            for i in 0..n {
                let d = noisy[i] - clean_scale * e[i];
                sum[i] += d;
                sum_sq[i] += d * d;
            }
        }
        let stats: Vec<McEstimate> = (0..n).map(|i| mean_and_stderr(sum[i], sum_sq[i], samples)).collect();
        let mean: Vec<f64> = stats.iter().map(|s| s.mean).collect();
        let se: Vec<f64> = stats.iter().map(|s| s.stderr).collect();
        if !all_finite(&mean) {
            return Err(Error::NonFiniteOracle { x: x.to_vec(), e: vec![] });
        }
        Ok(BiasEstimate {
            bias: self.norms.dual(&mean),
            stderr: self.norms.dual(&se),
        })
    }
}

pub(crate) fn mean_and_stderr(sum: f64, sum_sq: f64, count: usize) -> McEstimate {
    let k = count as f64;
    let mean = sum / k;
    let var = if count > 1 {
        ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        stderr: (var / k).sqrt(),
    }
}
