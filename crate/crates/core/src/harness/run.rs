//! Builds an experiment from a config, runs it, and produces its trace.

use crate::baselines::{self, BaselineConfig, BaselineMethod, StepRule};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::network::{penalty_coefficient, Graph, NetworkProblem};
use crate::oracles::NoiseKind;
use crate::problems::{
    prox_grad_l1, read_libsvm, weiszfeld, GeometricMedianInstance, LogRegLassoInstance, NesterovLassoInstance,
    VerificationInstance,
};
use crate::sliding::{
    mzosa_run, suggest_r_delta, theoretical_bound, zosa_run, BoundAt, BoundTerms, Budget, CompositeProblem,
    OracleSettings, RestartConfig, RunOptions, RunOutput, ScheduleInputs, SlidingSchedule,
};
use crate::trace::RunTrace;

use super::config::{BudgetDim, Experiment, Method, NoiseChoice, RunConfig, StepChoice};

/// Known or long-run optimum used for gap columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub value: f64,
    pub source: String,
    pub point: Option<Vec<f64>>,
}

/// Steps for the proximal-gradient reference solver.
pub const REFERENCE_STEPS: usize = 1_000_000;

/// An instance ready to run.
pub struct Prepared {
    pub problem: CompositeProblem,
    pub x0: Vec<f64>,
    pub reference: Reference,
    pub network: Option<NetworkProblem>,
    pub metadata: Vec<(String, String)>,
}

pub struct RunReport {
    pub trace: RunTrace,
    pub x: Vec<f64>,
    pub budget_hit: bool,
}

fn load_logreg(cfg: &RunConfig) -> Result<LogRegLassoInstance> {
    let mut inst = read_libsvm(cfg.resolve_data()?)?;
    inst.l1 = cfg.l1();
    Ok(inst)
}

fn geom_instance(cfg: &RunConfig) -> Result<GeometricMedianInstance> {
    GeometricMedianInstance::generate(cfg.m, cfg.dim(), cfg.seed)
}

fn graph_for(cfg: &RunConfig) -> Result<Graph> {
    match &cfg.graph_file {
        Some(path) if cfg.topology == crate::network::Topology::Custom => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config("graph_file", format!("{path}: {e}")))?;
            Graph::from_edge_list(&text, Some(cfg.m))
        }
        _ => Graph::build(cfg.topology, cfg.m),
    }
}

/// The reference optimum for a config. Logreg and Nesterov references do not
/// depend on the seed and can be shared across runs.
pub fn compute_reference(cfg: &RunConfig) -> Result<Reference> {
    match cfg.experiment {
        Experiment::Synthetic => {
            let inst = VerificationInstance::with_curvature(cfg.dim(), cfg.seed, cfg.l1(), cfg.curvature_min, 1.0)?;
            Ok(Reference {
                value: inst.psi_star,
                source: "closed_form_soft_threshold".into(),
                point: Some(inst.x_star),
            })
        }
        Experiment::GeomMedian => {
            let inst = geom_instance(cfg)?;
            let (x, v) = weiszfeld(&inst, 100_000, 1e-13);
            Ok(Reference {
                value: v,
                source: "weiszfeld".into(),
                point: Some(x),
            })
        }
        Experiment::Nesterov => {
            let inst = NesterovLassoInstance::new(cfg.dim(), cfg.nesterov_l, cfg.l1())?;
            let res = prox_grad_l1(
                &|x: &[f64]| inst.g_grad(x),
                &|x: &[f64]| inst.g_value(x),
                inst.l,
                inst.l1,
                &vec![0.0; inst.n],
                REFERENCE_STEPS,
                1e-15,
            );
            Ok(Reference {
                value: res.value,
                source: format!("proximal_gradient:{}_steps", res.steps),
                point: Some(res.x),
            })
        }
        Experiment::Logreg => {
            let inst = load_logreg(cfg)?;
            let res = prox_grad_l1(
                &|x: &[f64]| inst.g_grad(x),
                &|x: &[f64]| inst.g_value(x),
                inst.smoothness(),
                inst.l1,
                &vec![0.0; inst.n()],
                REFERENCE_STEPS,
                1e-15,
            );
            Ok(Reference {
                value: res.value,
                source: format!("proximal_gradient:{}_steps", res.steps),
                point: Some(res.x),
            })
        }
    }
}

fn noise_kind(cfg: &RunConfig, dim: usize) -> NoiseKind {
    match cfg.noise {
        NoiseChoice::Zero => NoiseKind::Zero,
        NoiseChoice::Uniform => NoiseKind::Uniform { delta: cfg.delta },
        NoiseChoice::Sine => NoiseKind::AdversarialSine {
            delta: cfg.delta,
            omega: vec![cfg.omega; dim],
        },
    }
}

/// Smoothing radius: the config's `r`, else `ε/(4M)`.
fn smoothing_radius(cfg: &RunConfig, m_f: f64, meta: &mut Vec<(String, String)>, dim: usize, d_x: f64) -> Result<f64> {
    let p_star = crate::geometry::NormPair::euclidean().default_p_star(dim);
    let sug = suggest_r_delta(cfg.eps, m_f.max(f64::MIN_POSITIVE), dim, d_x, p_star, 1.0)?;
    meta.push(("derived.delta_max".into(), sug.delta_max.to_string()));
    meta.push(("derived.s_min".into(), sug.s_min.to_string()));
    let r = match cfg.r {
        Some(r) => r,
        None if m_f > 0.0 => sug.r,
        None => cfg.eps,
    };
    meta.push(("derived.r".into(), r.to_string()));
    Ok(r)
}

pub fn prepare(cfg: &RunConfig, reference: Option<&Reference>) -> Result<Prepared> {
    cfg.validate()?;
    let reference = match reference {
        Some(r) => r.clone(),
        None => compute_reference(cfg)?,
    };
    let mut meta: Vec<(String, String)> = Vec::new();
    let dim = cfg.dim();
    let (problem, x0, network) = match cfg.experiment {
        Experiment::Synthetic => {
            let inst = VerificationInstance::with_curvature(dim, cfg.seed, cfg.l1(), cfg.curvature_min, 1.0)?;
            let set = inst.set();
            let d_x = set.diameter(&crate::geometry::NormPair::euclidean());
            let m_f = inst.lambda * (dim as f64).sqrt();
            let r = smoothing_radius(cfg, m_f, &mut meta, dim, d_x)?;
            let settings = OracleSettings {
                noise: noise_kind(cfg, dim),
                r,
                s: None,
                p_star: None,
            };
            let p = inst.problem(&settings, cfg.seed)?;
            let x0 = match cfg.start.as_deref() {
                Some("zero") => vec![0.0; dim],
                _ => vec![inst.half_width; dim],
            };
            (p, x0, None)
        }
        Experiment::GeomMedian => {
            let inst = geom_instance(cfg)?;
            let graph = graph_for(cfg)?;
            let lap = crate::network::Laplacian::build(&graph)?;
            let r_y_sq = cfg.penalty_m * cfg.penalty_m / (cfg.m as f64 * lap.lambda_min_plus);
            let r_pen = match cfg.penalty_r {
                Some(r) => r,
                None => penalty_coefficient(cfg.penalty_m, cfg.m, lap.lambda_min_plus, cfg.eps)?,
            };
            meta.push(("derived.R".into(), r_pen.to_string()));
            meta.push(("derived.R_y_sq_bound".into(), r_y_sq.to_string()));
            meta.push(("derived.penalty_eps".into(), (r_y_sq / r_pen).to_string()));
            meta.push(("derived.lambda_max".into(), lap.lambda_max.to_string()));
            meta.push(("derived.lambda_min_plus".into(), lap.lambda_min_plus.to_string()));
            meta.push(("derived.chi".into(), lap.chi.to_string()));
            let half = inst.anchors.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs())) + 1.0;
            let node_set = FeasibleSet::cube(dim, half)?;
            let nodes = inst.node_functions().into_iter().map(|(v, g)| (v, Some(g))).collect();
            let net = NetworkProblem::new(graph, dim, nodes, 1.0, r_pen)?;
            let total = dim * cfg.m;
            let d_x = node_set.diameter(&crate::geometry::NormPair::euclidean()) * (cfg.m as f64).sqrt();
            let r = smoothing_radius(cfg, 1.0 / (cfg.m as f64).sqrt(), &mut meta, total, d_x)?;
            let settings = OracleSettings {
                noise: noise_kind(cfg, total),
                r,
                s: None,
                p_star: None,
            };
            let p = net.lift_to_penalized(&node_set, &settings, cfg.seed)?;
            let x0 = match cfg.start.as_deref() {
                Some("zero") => vec![0.0; total],
                _ => inst.anchors.concat(),
            };
            (p, x0, Some(net))
        }
        Experiment::Nesterov | Experiment::Logreg => {
            let x0 = vec![0.0; dim_of(cfg)?];
            let hint = match (cfg.bound_hint, &reference.point) {
                (Some(h), _) => {
                    meta.push(("derived.bound_hint_source".into(), "config".into()));
                    h
                }
                (None, Some(x_star)) => {
                    meta.push(("derived.bound_hint_source".into(), "2 * |x_ref - x0|".into()));
                    (2.0 * crate::linalg::dist2(x_star, &x0)).max(1e-6)
                }
                (None, None) => return Err(Error::config("bound_hint", "needed without a reference point")),
            };
            meta.push(("derived.bound_hint".into(), hint.to_string()));
            let n = x0.len();
            let m_f = cfg.l1() * (n as f64).sqrt();
            let r = smoothing_radius(cfg, m_f, &mut meta, n, hint)?;
            let settings = OracleSettings {
                noise: noise_kind(cfg, n),
                r,
                s: None,
                p_star: None,
            };
            let p = if cfg.experiment == Experiment::Nesterov {
                NesterovLassoInstance::new(n, cfg.nesterov_l, cfg.l1())?.problem(hint, &settings, cfg.seed)?
            } else {
                let inst = load_logreg(cfg)?;
                meta.push(("derived.dataset_m".into(), inst.m().to_string()));
                meta.push(("derived.dataset_n".into(), inst.n().to_string()));
                inst.problem(hint, &settings, cfg.seed)?
            };
            (p, x0, None)
        }
    };
    let mut problem = problem.with_reference(reference.value);
    if let Some(m_est) = cfg.m_est {
        problem.f.lipschitz = m_est;
    }
    meta.push(("derived.L".into(), problem.g.lipschitz.to_string()));
    meta.push(("derived.M".into(), problem.f.lipschitz.to_string()));
    meta.push(("derived.D_X".into(), problem.setup.d_x.to_string()));
    meta.push(("reference".into(), reference.value.to_string()));
    meta.push(("reference_source".into(), reference.source.clone()));
    for note in &problem.notes {
        meta.push((format!("note.{}", note.0), note.1.clone()));
    }
    Ok(Prepared {
        problem,
        x0,
        reference,
        network,
        metadata: meta,
    })
}

fn dim_of(cfg: &RunConfig) -> Result<usize> {
    match cfg.experiment {
        Experiment::Logreg => Ok(load_logreg(cfg)?.n()),
        _ => Ok(cfg.dim()),
    }
}

/// The sliding schedule for `n_outer` with the config's overrides applied.
pub fn schedule_for(cfg: &RunConfig, problem: &CompositeProblem, n_outer: usize) -> Result<SlidingSchedule> {
    let est = &problem.estimator;
    SlidingSchedule::new(ScheduleInputs {
        l: cfg.l_override.unwrap_or(problem.g.lipschitz),
        mu: cfg.mu_override.unwrap_or(problem.g.strong_convexity),
        m_est: cfg.m_est.unwrap_or(problem.f.lipschitz),
        dim: problem.dim(),
        c1: problem.setup.norms.c1,
        p_star: est.p_star,
        delta: problem.delta(),
        r: est.r,
        d_tilde: 0.75 * problem.setup.d_xv * problem.setup.d_xv,
        n_outer,
        t_cap: cfg.t_cap,
        c_const: cfg.c_const,
        big_c_const: cfg.big_c_const,
    })
}

fn budget_of(cfg: &RunConfig) -> Budget {
    Budget {
        max_zo_calls: cfg.max_zo_calls,
        max_comm_rounds: cfg.max_comm_rounds,
        max_fo_calls: cfg.max_fo_calls,
        max_wall_ms: cfg.max_wall_ms,
    }
}

/// Step count for a baseline from N or its primary budget.
fn baseline_steps(cfg: &RunConfig) -> Result<usize> {
    let per_step_zo = if cfg.method == Method::Zogd { 2 } else { 0 };
    Ok(match cfg.primary_budget()? {
        BudgetDim::Steps => cfg.n_outer.unwrap_or(1),
        BudgetDim::ZoCalls => (cfg.max_zo_calls.unwrap_or(0) / per_step_zo.max(1)) as usize,
        BudgetDim::CommRounds => cfg.max_comm_rounds.unwrap_or(0) as usize,
        BudgetDim::FoCalls => cfg.max_fo_calls.unwrap_or(0) as usize,
        BudgetDim::WallMs => usize::MAX / 2,
    }
    .max(1))
}

pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    run_with(cfg, None, false)
}

/// Runs a config, optionally with a precomputed reference and the bound column.
pub fn run_with(cfg: &RunConfig, reference: Option<&Reference>, with_bound: bool) -> Result<RunReport> {
    let prep = prepare(cfg, reference)?;
    let Prepared {
        mut problem,
        x0,
        mut metadata,
        ..
    } = prep;
    let opts = RunOptions {
        checkpoints: cfg.checkpoints,
        budget: budget_of(cfg),
        record_wall_time: cfg.record_wall_time,
    };
    let mut bound_plan: Option<(BoundTerms, Option<f64>)> = None;
    let out: RunOutput = match cfg.method {
        Method::Zosa => {
            let probe = schedule_for(cfg, &problem, 1)?;
            let n_outer = match cfg.primary_budget()? {
                BudgetDim::Steps => cfg.n_outer.unwrap_or(1),
                BudgetDim::ZoCalls => probe.fit_outer_to_zo_budget(cfg.max_zo_calls.unwrap_or(0)),
                BudgetDim::CommRounds => cfg.max_comm_rounds.unwrap_or(1) as usize,
                BudgetDim::FoCalls => cfg.max_fo_calls.unwrap_or(1) as usize,
                BudgetDim::WallMs => unreachable!("rejected by validation"),
            };
            let sched = schedule_for(cfg, &problem, n_outer)?;
            record_schedule(&mut metadata, &sched);
            metadata.push(("derived.N".into(), n_outer.to_string()));
            let cap = (1..=n_outer).any(|k| sched.cap_binds(k));
            metadata.push(("derived.T_cap_binds".into(), cap.to_string()));
            bound_plan = Some((BoundTerms::from_parts(&sched, &problem.setup, &problem.estimator), None));
            zosa_run(&mut problem, &sched, &x0, &opts)?
        }
        Method::Mzosa => {
            let sched0 = schedule_for(cfg, &problem, 1)?;
            let rho0 = cfg.rho0.unwrap_or_else(|| problem.psi0(&x0) - problem.psi0_reference.unwrap_or(0.0));
            if !(rho0 > 0.0) {
                return Err(Error::config("rho0", format!("must be positive, got {rho0}")));
            }
            let mut restart = RestartConfig::auto(sched0.l, sched0.mu, rho0, cfg.eps)
                .map_err(|e| Error::config("mu", e.to_string()))?;
            if let Some(n0) = cfg.n0 {
                restart.n0 = n0;
            }
            if let Some(p) = cfg.phases {
                restart.phases = p;
            }
            let sched = sched0.with_outer(restart.n0, sched0.d_tilde);
            record_schedule(&mut metadata, &sched);
            metadata.push(("derived.rho0".into(), rho0.to_string()));
            metadata.push(("derived.N0".into(), restart.n0.to_string()));
            metadata.push(("derived.phases".into(), restart.phases.to_string()));
            let cap = (1..=restart.phases).any(|i| {
                let s = sched.with_outer(restart.n0, rho0 / (sched.mu * 2f64.powi(i as i32)));
                (1..=restart.n0).any(|k| s.cap_binds(k))
            });
            metadata.push(("derived.T_cap_binds".into(), cap.to_string()));
            bound_plan = Some((BoundTerms::from_parts(&sched, &problem.setup, &problem.estimator), Some(rho0)));
            mzosa_run(&mut problem, &sched, &restart, &x0, &opts)?
        }
        Method::Gd | Method::Zogd => {
            let method = if cfg.method == Method::Gd {
                BaselineMethod::Gd
            } else {
                BaselineMethod::ZoGd
            };
            let eta = cfg.eta.unwrap_or_else(|| baselines::default_eta0(&problem, method)) * cfg.eta_scale;
            let step_rule = match cfg.step_rule {
                StepChoice::Constant => StepRule::Constant { eta },
                StepChoice::InvSqrt => StepRule::InvSqrt { eta0: eta },
            };
            metadata.push(("derived.eta".into(), eta.to_string()));
            let n_steps = baseline_steps(cfg)?;
            metadata.push(("derived.N".into(), n_steps.to_string()));
            let bc = BaselineConfig {
                method,
                step_rule,
                n_steps,
                r: problem.estimator.r,
                averaging: cfg.averaging,
            };
            if method == BaselineMethod::Gd {
                baselines::gd_run(&mut problem, &bc, &x0, &opts)?
            } else {
                baselines::zogd_run(&mut problem, &bc, &x0, &opts)?
            }
        }
    };
    let mut trace = out.trace;
    if with_bound {
        let (terms, rho0) = bound_plan.ok_or_else(|| Error::config("--with-bound", "bounds exist for zosa and mzosa only"))?;
        for row in &mut trace.rows {
            row.bound = match rho0 {
                None if row.step == 0 => None,
                None => Some(theoretical_bound(&terms, BoundAt::Convex { n_outer: row.step })),
                Some(rho0) => Some(theoretical_bound(&terms, BoundAt::Phase { phase: row.phase, rho0 })),
            };
        }
    }
    trace.set_meta("version", env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg.to_pairs() {
        trace.set_meta(format!("config.{k}"), v);
    }
    for (k, v) in metadata {
        trace.set_meta(k, v);
    }
    trace.set_meta("budget_hit", out.budget_hit);
    Ok(RunReport {
        trace,
        x: out.x,
        budget_hit: out.budget_hit,
    })
}

fn record_schedule(meta: &mut Vec<(String, String)>, sched: &SlidingSchedule) {
    meta.push(("derived.D_tilde".into(), sched.d_tilde.to_string()));
    meta.push(("derived.M_tilde".into(), sched.m_tilde.to_string()));
    meta.push(("derived.sigma_sq".into(), sched.sigma_sq.to_string()));
    meta.push(("derived.schedule_L".into(), sched.l.to_string()));
    meta.push(("derived.schedule_mu".into(), sched.mu.to_string()));
}
