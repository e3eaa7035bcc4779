use crate::error::{Error, Result};
use crate::linalg::{all_finite, blend};
use crate::trace::{Counters, RunTrace, TraceRow};

use super::problem::CompositeProblem;
use super::schedule::{SlidingSchedule, StepSchedule};

/// Hard stops checked after every outer iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub max_zo_calls: Option<u64>,
    pub max_comm_rounds: Option<u64>,
    pub max_fo_calls: Option<u64>,
    pub max_wall_ms: Option<u64>,
}

impl Budget {
    pub(crate) fn exceeded(&self, used: Counters, wall_ms: Option<f64>) -> bool {
        let over = |limit: Option<u64>, v: u64| limit.is_some_and(|l| v >= l);
        over(self.max_zo_calls, used.zo_calls)
            || over(self.max_comm_rounds, used.comm_rounds)
            || over(self.max_fo_calls, used.fo_calls)
            || matches!((self.max_wall_ms, wall_ms), (Some(l), Some(w)) if w >= l as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Roughly how many evenly spaced rows to record besides step 0 and the last step.
    pub checkpoints: usize,
    pub budget: Budget,
    pub record_wall_time: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            checkpoints: 20,
            budget: Budget::default(),
            record_wall_time: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub x: Vec<f64>,
    pub trace: RunTrace,
    /// True when a budget stopped the run early.
    pub budget_hit: bool,
}

/// Records checkpoint rows with counters relative to the run start.
pub(crate) struct Recorder {
    base: Counters,
    clock: Option<Clock>,
    psi_start: Option<f64>,
    pub(crate) trace: RunTrace,
    pub(crate) phase: usize,
}

#[cfg(not(target_arch = "wasm32"))]
type Clock = std::time::Instant;
#[cfg(target_arch = "wasm32")]
type Clock = ();

fn start_clock() -> Option<Clock> {
    #[cfg(not(target_arch = "wasm32"))]
    {
        Some(std::time::Instant::now())
    }
    #[cfg(target_arch = "wasm32")]
    {
        None
    }
}

impl Recorder {
    pub(crate) fn new(problem: &CompositeProblem, opts: &RunOptions) -> Self {
        let timed = opts.record_wall_time || opts.budget.max_wall_ms.is_some();
        Recorder {
            base: problem.counters(),
            clock: if timed { start_clock() } else { None },
            psi_start: None,
            trace: RunTrace::default(),
            phase: 0,
        }
    }

    pub(crate) fn used(&self, problem: &CompositeProblem) -> Counters {
        problem.counters().since(self.base)
    }

    pub(crate) fn elapsed_ms(&self) -> Option<f64> {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.clock.map(|c| c.elapsed().as_secs_f64() * 1e3)
        }
        #[cfg(target_arch = "wasm32")]
        {
            let _ = self.clock;
            None
        }
    }

    pub(crate) fn record(
        &mut self,
        problem: &CompositeProblem,
        step: usize,
        x: &[f64],
        used: Counters,
        record_wall: bool,
    ) -> Result<()> {
        let psi0 = problem.psi0(x);
        if !psi0.is_finite() {
            return Err(Error::NonFiniteObjective {
                step,
                psi0,
                state: x.to_vec(),
            });
        }
        let gap = problem.psi0_reference.map(|r| psi0 - r);
        if self.psi_start.is_none() {
            self.psi_start = Some(psi0);
        }
        let rel_gap = match (gap, self.psi_start, problem.psi0_reference) {
            (Some(g), Some(p0), Some(r)) if p0 - r > 0.0 => Some(g / (p0 - r)),
            _ => None,
        };
        self.trace.rows.push(TraceRow {
            step,
            fo_calls: used.fo_calls,
            zo_calls: used.zo_calls,
            comm_rounds: used.comm_rounds,
            wall_ms: if record_wall { self.elapsed_ms() } else { None },
            psi0,
            gap,
            rel_gap,
            consensus_sq_norm: problem.consensus_sq_norm(x),
            phase: self.phase,
            bound: None,
        });
        Ok(())
    }
}

pub(crate) fn checkpoint_stride(n: usize, checkpoints: usize) -> usize {
    if checkpoints == 0 {
        usize::MAX
    } else {
        n.div_ceil(checkpoints).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsOutput {
    pub x_plus: Vec<f64>,
    pub x_tilde_plus: Vec<f64>,
}

/// Prox-sliding: `T` inner steps against the frozen linearization of g whose
/// gradient is `h_grad`, each using one fresh two-point estimate of ∇F.
pub fn ps_procedure<S: StepSchedule + ?Sized>(
    problem: &mut CompositeProblem,
    sched: &S,
    h_grad: &[f64],
    x: &[f64],
    beta: f64,
    t_count: usize,
) -> Result<PsOutput> {
    let abort = |t: usize, e: Error| Error::SolverAbort {
        k: 0,
        t,
        source: Box::new(e),
    };
    if t_count == 0 {
        return Err(Error::invalid("T", "inner iteration count must be >= 1"));
    }
    let mut u = x.to_vec();
    let mut u_tilde = x.to_vec();
    let mut a = vec![0.0; x.len()];
    for t in 1..=t_count {
        let est = problem.estimator.estimate(&u).map_err(|e| abort(t, e))?;
        for i in 0..a.len() {
            a[i] = h_grad[i] + est[i];
        }
        u = problem
            .setup
            .prox_step(&a, x, &u, beta, sched.p(t))
            .map_err(|e| abort(t, e))?;
        let theta = sched.theta(t);
        for (ut, un) in u_tilde.iter_mut().zip(&u) {
            *ut = (1.0 - theta) * *ut + theta * un;
        }
    }
    Ok(PsOutput {
        x_plus: u,
        x_tilde_plus: u_tilde,
    })
}

/// The zeroth-order sliding method. Returns `x̄_N` (or the last `x̄_k` when a
/// budget stops the run) and a trace with counters relative to the start.
pub fn zosa_run<S: StepSchedule + ?Sized>(
    problem: &mut CompositeProblem,
    sched: &S,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<RunOutput> {
    let mut rec = Recorder::new(problem, opts);
    let (x, budget_hit) = zosa_phase(problem, sched, x0, opts, &mut rec, 0)?;
    Ok(RunOutput {
        x,
        trace: rec.trace,
        budget_hit,
    })
}

fn zosa_phase<S: StepSchedule + ?Sized>(
    problem: &mut CompositeProblem,
    sched: &S,
    x0: &[f64],
    opts: &RunOptions,
    rec: &mut Recorder,
    step_offset: usize,
) -> Result<(Vec<f64>, bool)> {
    crate::error::check_dim(problem.dim(), x0.len())?;
    if !problem.setup.set.contains(x0, 1e-9) {
        return Err(Error::invalid("x0", "starting point is not feasible"));
    }
    let n_outer = sched.outer_iterations();
    let stride = checkpoint_stride(n_outer, opts.checkpoints);
    if rec.trace.rows.is_empty() {
        rec.record(problem, 0, x0, rec.used(problem), opts.record_wall_time)?;
    }
    let mut x_prev = x0.to_vec();
    let mut x_bar = x0.to_vec();
    let mut stop = false;
    for k in 1..=n_outer {
        let gamma = sched.gamma(k);
        let x_low = blend(&x_bar, &x_prev, gamma);
        let h_grad = problem.grad_g(&x_low)?;
        if !all_finite(&h_grad) {
            return Err(Error::SolverAbort {
                k,
                t: 0,
                source: Box::new(Error::NonFiniteObjective {
                    step: k,
                    psi0: f64::NAN,
                    state: x_low,
                }),
            });
        }
        let ps = ps_procedure(problem, sched, &h_grad, &x_prev, sched.beta(k), sched.inner_iterations(k))
            .map_err(|e| match e {
                Error::SolverAbort { t, source, .. } => Error::SolverAbort { k, t, source },
                other => other,
            })?;
        x_bar = blend(&x_bar, &ps.x_tilde_plus, gamma);
        x_prev = ps.x_plus;

        let used = rec.used(problem);
        stop = opts.budget.exceeded(used, rec.elapsed_ms());
        if k % stride == 0 || k == n_outer || stop {
            rec.record(problem, step_offset + k, &x_bar, used, opts.record_wall_time)?;
        }
        if stop && k < n_outer {
            return Ok((x_bar, true));
        }
    }
    Ok((x_bar, stop))
}

/// Restart settings for the strongly convex variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartConfig {
    /// Upper estimate of the initial gap Ψ(y₀) − Ψ*.
    pub rho0: f64,
    pub n0: usize,
    pub phases: usize,
}

impl RestartConfig {
    /// `N₀ = 2⌈√(5L/μ)⌉` and `I = ⌈log₂ max(1, ρ₀/ε)⌉`.
    pub fn auto(l: f64, mu: f64, rho0: f64, eps: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::invalid("mu", "restarts need mu > 0; use zosa_run otherwise"));
        }
        Ok(RestartConfig {
            rho0,
            n0: Self::default_n0(l, mu),
            phases: (rho0 / eps).max(1.0).log2().ceil() as usize,
        })
    }

    pub fn default_n0(l: f64, mu: f64) -> usize {
        2 * (5.0 * l / mu).sqrt().ceil() as usize
    }
}

/// Multi-phase restarts: phase i runs the sliding method for `N₀` outer
/// iterations from the previous output with `D̃ = ρ₀ / (μ 2ⁱ)`.
pub fn mzosa_run(
    problem: &mut CompositeProblem,
    sched: &SlidingSchedule,
    restart: &RestartConfig,
    y0: &[f64],
    opts: &RunOptions,
) -> Result<RunOutput> {
    if !(sched.mu > 0.0) {
        return Err(Error::invalid(
            "mu",
            "multi-phase restarts need mu > 0; use zosa_run for the convex case",
        ));
    }
    if !(restart.rho0 > 0.0) {
        return Err(Error::invalid("rho0", "must be positive"));
    }
    if restart.n0 == 0 {
        return Err(Error::invalid("N0", "must be >= 1"));
    }
    let mut rec = Recorder::new(problem, opts);
    rec.record(problem, 0, y0, rec.used(problem), opts.record_wall_time)?;
    let mut y = y0.to_vec();
    let mut budget_hit = false;
    for i in 1..=restart.phases {
        let d_tilde = restart.rho0 / (sched.mu * 2f64.powi(i as i32));
        let phase_sched = sched.with_outer(restart.n0, d_tilde);
        rec.phase = i;
        let (next, hit) = zosa_phase(problem, &phase_sched, &y, opts, &mut rec, (i - 1) * restart.n0)?;
        y = next;
        if hit {
            budget_hit = true;
            break;
        }
    }
    Ok(RunOutput {
        x: y,
        trace: rec.trace,
        budget_hit,
    })
}
