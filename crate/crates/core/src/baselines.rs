//! Projected subgradient descent and its two-point zeroth-order variant.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::all_finite;
use crate::sliding::{checkpoint_stride, CompositeProblem, Recorder, RunOptions, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Gd,
    ZoGd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant { eta: f64 },
    /// `η_t = η₀ / √t`.
    InvSqrt { eta0: f64 },
}

impl StepRule {
    pub fn eta(&self, t: usize) -> f64 {
        match *self {
            StepRule::Constant { eta } => eta,
            StepRule::InvSqrt { eta0 } => eta0 / (t as f64).sqrt(),
        }
    }

    pub fn scaled(&self, factor: f64) -> StepRule {
        match *self {
            StepRule::Constant { eta } => StepRule::Constant { eta: eta * factor },
            StepRule::InvSqrt { eta0 } => StepRule::InvSqrt { eta0: eta0 * factor },
        }
    }
}

/// Which point a baseline reports at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    Last,
    /// Lowest clean Ψ₀ seen so far.
    RunningBest,
    /// Mean of `x_1 … x_t`.
    UniformAvg,
}

impl FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(Averaging::Last),
            "running_best" => Ok(Averaging::RunningBest),
            "uniform_avg" => Ok(Averaging::UniformAvg),
            other => Err(Error::invalid(
                "averaging",
                format!("unknown averaging `{other}` (last, running_best, uniform_avg)"),
            )),
        }
    }
}

impl fmt::Display for Averaging {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Averaging::Last => "last",
            Averaging::RunningBest => "running_best",
            Averaging::UniformAvg => "uniform_avg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub step_rule: StepRule,
    pub n_steps: usize,
    /// Smoothing radius for zoGD.
    pub r: f64,
    pub averaging: Averaging,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        let eta = match self.step_rule {
            StepRule::Constant { eta } => eta,
            StepRule::InvSqrt { eta0 } => eta0,
        };
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid("eta", format!("must be finite and >= 0, got {eta}")));
        }
        if self.method == BaselineMethod::ZoGd && !(self.r > 0.0) {
            return Err(Error::invalid("r", "zoGD needs r > 0"));
        }
        Ok(())
    }
}

/// `D_X / M_Ψ` for GD and `D_X / (√n c₁ M_Ψ)` for zoGD, where
/// `M_Ψ = M + L D_X` bounds the subgradients of Ψ₀ on X.
pub fn default_eta0(problem: &CompositeProblem, method: BaselineMethod) -> f64 {
    let d_x = problem.setup.d_x;
    let m_psi = problem.f.lipschitz + problem.g.lipschitz * d_x;
    match method {
        BaselineMethod::Gd => d_x / m_psi,
        BaselineMethod::ZoGd => d_x / ((problem.dim() as f64).sqrt() * problem.setup.norms.c1 * m_psi),
    }
}

struct Reporter {
    averaging: Averaging,
    best: Option<(f64, Vec<f64>)>,
    sum: Vec<f64>,
    count: usize,
}

impl Reporter {
    fn new(averaging: Averaging, x0: &[f64], psi0: f64) -> Self {
        Reporter {
            averaging,
            best: Some((psi0, x0.to_vec())),
            sum: vec![0.0; x0.len()],
            count: 0,
        }
    }

    fn push(&mut self, problem: &CompositeProblem, x: &[f64]) {
        match self.averaging {
            Averaging::Last => {}
            Averaging::RunningBest => {
                let v = problem.psi0(x);
                if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
                    self.best = Some((v, x.to_vec()));
                }
            }
            Averaging::UniformAvg => {
                for (s, v) in self.sum.iter_mut().zip(x) {
                    *s += v;
                }
                self.count += 1;
            }
        }
    }

    fn point(&self, x: &[f64]) -> Vec<f64> {
        match self.averaging {
            Averaging::Last => x.to_vec(),
            Averaging::RunningBest => self.best.as_ref().map(|(_, b)| b.clone()).unwrap_or_else(|| x.to_vec()),
            Averaging::UniformAvg if self.count > 0 => self.sum.iter().map(|s| s / self.count as f64).collect(),
            Averaging::UniformAvg => x.to_vec(),
        }
    }
}

/// Projected subgradient descent on Ψ₀ using a clean subgradient of f;
/// each step costs one first-order call.
pub fn gd_run(problem: &mut CompositeProblem, cfg: &BaselineConfig, x0: &[f64], opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let subgrad = problem
        .f
        .subgrad
        .clone()
        .ok_or_else(|| Error::invalid("f", "GD needs a subgradient oracle for f"))?;
    descend(problem, cfg, x0, opts, move |p, x| {
        let mut d = p.grad_g(x)?;
        for (di, si) in d.iter_mut().zip(subgrad(x)) {
            *di += si;
        }
        Ok(d)
    })
}

/// Projected descent along two-point estimates of ∇Ψ₀; f and g are both
/// queried by value only. On network problems each step costs one
/// communication round (both perturbed points are exchanged together).
pub fn zogd_run(problem: &mut CompositeProblem, cfg: &BaselineConfig, x0: &[f64], opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    let mut est = problem.full_objective_estimator(cfg.r)?;
    descend(problem, cfg, x0, opts, |p, x| {
        p.charge_comm_round();
        let before = est.zo_calls();
        let d = est.estimate(x)?;
        p.add_zo_calls(est.zo_calls() - before);
        Ok(d)
    })
}

fn descend<F>(problem: &mut CompositeProblem, cfg: &BaselineConfig, x0: &[f64], opts: &RunOptions, mut direction: F) -> Result<RunOutput>
where
    F: FnMut(&mut CompositeProblem, &[f64]) -> Result<Vec<f64>>,
{
    crate::error::check_dim(problem.dim(), x0.len())?;
    if !problem.setup.set.contains(x0, 1e-9) {
        return Err(Error::invalid("x0", "starting point is not feasible"));
    }
    let mut rec = Recorder::new(problem, opts);
    rec.record(problem, 0, x0, rec.used(problem), opts.record_wall_time)?;
    let mut reporter = Reporter::new(cfg.averaging, x0, problem.psi0(x0));
    let stride = checkpoint_stride(cfg.n_steps, opts.checkpoints);
    let mut x = x0.to_vec();
    let mut budget_hit = false;
    for t in 1..=cfg.n_steps {
        let d = direction(problem, &x).map_err(|e| Error::SolverAbort {
            k: t,
            t: 0,
            source: Box::new(e),
        })?;
        let eta = cfg.step_rule.eta(t);
        let z: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - eta * di).collect();
        x = problem.setup.set.project(&z)?;
        if !all_finite(&x) {
            return Err(Error::NonFiniteObjective {
                step: t,
                psi0: f64::NAN,
                state: x,
            });
        }
        reporter.push(problem, &x);
        let used = rec.used(problem);
        budget_hit = opts.budget.exceeded(used, rec.elapsed_ms());
        if t % stride == 0 || t == cfg.n_steps || budget_hit {
            rec.record(problem, t, &reporter.point(&x), used, opts.record_wall_time)?;
        }
        if budget_hit {
            break;
        }
    }
    Ok(RunOutput {
        x: reporter.point(&x),
        trace: rec.trace,
        budget_hit,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{FeasibleSet, ProximalSetup};
    use crate::network::{Graph, NetworkProblem};
    use crate::oracles::NoiseKind;
    use crate::problems::GeometricMedianInstance;
    use crate::sliding::{NonsmoothTerm, OracleSettings, SmoothTerm};

    fn settings() -> OracleSettings {
        OracleSettings {
            noise: NoiseKind::Zero,
            r: 1e-3,
            s: None,
            p_star: None,
        }
    }

    fn linear_f(c: Vec<f64>) -> NonsmoothTerm {
        let (c1, c2) = (c.clone(), c.clone());
        NonsmoothTerm {
            value: Arc::new(move |x: &[f64]| crate::linalg::dot(&c1, x)),
            subgrad: Some(Arc::new(move |_: &[f64]| c2.clone())),
            lipschitz: crate::linalg::norm2(&c),
        }
    }

    fn quadratic(scale: f64) -> SmoothTerm {
        SmoothTerm {
            value: Arc::new(move |x: &[f64]| 0.5 * scale * crate::linalg::dot(x, x)),
            grad: Arc::new(move |x: &[f64]| x.iter().map(|v| scale * v).collect()),
            lipschitz: scale.max(1e-12),
            strong_convexity: scale,
        }
    }

    fn ball_problem(n: usize, f: NonsmoothTerm, g: SmoothTerm, seed: u64) -> CompositeProblem {
        let setup = ProximalSetup::euclidean(FeasibleSet::ball2(vec![0.0; n], 2.0).unwrap());
        CompositeProblem::new(setup, g, f, &settings(), seed).unwrap()
    }

    fn cfg(method: BaselineMethod, step_rule: StepRule, n_steps: usize, averaging: Averaging) -> BaselineConfig {
        BaselineConfig {
            method,
            step_rule,
            n_steps,
            r: 1e-3,
            averaging,
        }
    }

    #[test]
    fn one_explicit_step() {
        let mut p = ball_problem(2, linear_f(vec![0.0, 0.0]), quadratic(1.0), 0);
        let c = cfg(BaselineMethod::Gd, StepRule::Constant { eta: 0.5 }, 1, Averaging::Last);
        let out = gd_run(&mut p, &c, &[1.0, 0.0], &RunOptions::default()).unwrap();
        assert_eq!(out.x, vec![0.5, 0.0]);
        assert_eq!(out.trace.last().unwrap().fo_calls, 1);
    }

    #[test]
    fn zero_step_keeps_the_start() {
        for method in [BaselineMethod::Gd, BaselineMethod::ZoGd] {
            let mut p = ball_problem(3, linear_f(vec![1.0, -1.0, 0.5]), quadratic(1.0), 0);
            let c = cfg(method, StepRule::Constant { eta: 0.0 }, 10, Averaging::Last);
            let run = if method == BaselineMethod::Gd { gd_run } else { zogd_run };
            let out = run(&mut p, &c, &[0.3, 0.2, 0.1], &RunOptions::default()).unwrap();
            assert_eq!(out.x, vec![0.3, 0.2, 0.1]);
        }
    }

    #[test]
    fn zogd_counts_and_constant_objective() {
        let mut p = ball_problem(3, linear_f(vec![0.0; 3]), quadratic(0.0), 1);
        let c = cfg(BaselineMethod::ZoGd, StepRule::InvSqrt { eta0: 1.0 }, 100, Averaging::Last);
        let x0 = vec![0.5, -0.5, 0.25];
        let out = zogd_run(&mut p, &c, &x0, &RunOptions::default()).unwrap();
        assert_eq!(out.x, x0);
        let last = out.trace.last().unwrap();
        assert_eq!(last.zo_calls, 200);
        assert_eq!(last.fo_calls, 0);
        assert_eq!(last.comm_rounds, 0);
    }

    #[test]
    fn running_best_is_monotone_on_the_median_problem() {
        let inst = GeometricMedianInstance::generate(5, 3, 2).unwrap();
        let nodes = inst.node_functions().into_iter().map(|(v, g)| (v, Some(g))).collect();
        let net = NetworkProblem::new(Graph::star(5).unwrap(), 3, nodes, 1.0, 10.0).unwrap();
        let node_set = FeasibleSet::cube(3, 6.0).unwrap();
        for method in [BaselineMethod::Gd, BaselineMethod::ZoGd] {
            let mut p = net.lift_to_penalized(&node_set, &settings(), 3).unwrap();
            let eta0 = default_eta0(&p, method);
            let c = cfg(method, StepRule::InvSqrt { eta0 }, 400, Averaging::RunningBest);
            let run = if method == BaselineMethod::Gd { gd_run } else { zogd_run };
            let before = p.comm_rounds();
            let out = run(&mut p, &c, &vec![0.0; 15], &RunOptions { checkpoints: 400, ..Default::default() }).unwrap();
            assert!(out.trace.rows.windows(2).all(|w| w[1].psi0 <= w[0].psi0));
            assert_eq!(p.comm_rounds() - before, 400);
            assert_eq!(out.trace.last().unwrap().comm_rounds, 400);
        }
    }

    #[test]
    fn zogd_on_a_linear_objective_decays_like_inverse_sqrt() {
        let n = 4;
        let c = vec![1.0, -2.0, 0.5, 1.5];
        let cn = crate::linalg::norm2(&c);
        let optimum = -2.0 * cn;
        let checkpoints = [100usize, 300, 1000, 3000, 10_000];
        let mut mean = vec![0.0; checkpoints.len()];
        let seeds = 40;
        for seed in 0..seeds {
            let mut p = ball_problem(n, linear_f(c.clone()), quadratic(0.0), seed);
            let eta0 = 4.0 / ((n as f64).sqrt() * cn);
            let bc = cfg(BaselineMethod::ZoGd, StepRule::InvSqrt { eta0 }, 10_000, Averaging::UniformAvg);
            let out = zogd_run(&mut p, &bc, &[0.0; 4], &RunOptions { checkpoints: 100, ..Default::default() }).unwrap();
            for (slot, k) in mean.iter_mut().zip(checkpoints) {
                let row = out.trace.rows.iter().find(|r| r.step == k).unwrap();
                *slot += (row.psi0 - optimum) / seeds as f64;
            }
        }
        let xs: Vec<f64> = checkpoints.iter().map(|k| (*k as f64).ln()).collect();
        let ys: Vec<f64> = mean.iter().map(|g| g.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() <= 0.15, "slope {slope}, gaps {mean:?}");
    }

    #[test]
    fn gd_converges_linearly_on_a_strongly_convex_quadratic() {
        let mut p = ball_problem(3, linear_f(vec![0.0; 3]), quadratic(1.0), 0);
        let c = cfg(BaselineMethod::Gd, StepRule::Constant { eta: 0.1 }, 50, Averaging::Last);
        let out = gd_run(&mut p, &c, &[1.0, -1.0, 0.5], &RunOptions { checkpoints: 50, ..Default::default() }).unwrap();
        let psi: Vec<f64> = out.trace.rows.iter().map(|r| r.psi0).collect();
        assert_eq!(psi.len(), 51);
        assert!(psi.windows(2).all(|w| w[1] / w[0] < 1.0));
    }

    #[test]
    fn gd_needs_a_subgradient() {
        let mut f = linear_f(vec![1.0]);
        f.subgrad = None;
        let mut p = ball_problem(1, f, quadratic(1.0), 0);
        let c = cfg(BaselineMethod::Gd, StepRule::Constant { eta: 0.1 }, 5, Averaging::Last);
        assert!(gd_run(&mut p, &c, &[0.0], &RunOptions::default()).is_err());
        let bad = cfg(BaselineMethod::ZoGd, StepRule::Constant { eta: -1.0 }, 5, Averaging::Last);
        assert!(zogd_run(&mut p, &bad, &[0.0], &RunOptions::default()).is_err());
    }
}
