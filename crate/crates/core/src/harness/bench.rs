//! Multi-seed method comparison.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trace::{RunTrace, TraceRow};

use super::config::{BudgetDim, Experiment, Method, RunConfig};
use super::run::{compute_reference, run_with, Reference};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Final Ψ₀ gap.
    GapAtBudget,
    /// Counter value at the first checkpoint with relative gap ≤ target.
    BudgetToGap { target: f64 },
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "gap_at_budget" {
            return Ok(Metric::GapAtBudget);
        }
        if let Some(t) = s.strip_prefix("budget_to_gap:") {
            let target: f64 = t
                .parse()
                .map_err(|_| Error::config("--metric", format!("bad target `{t}`")))?;
            if !(target > 0.0) {
                return Err(Error::config("--metric", "target must be positive"));
            }
            return Ok(Metric::BudgetToGap { target });
        }
        Err(Error::config(
            "--metric",
            format!("unknown metric `{s}` (gap_at_budget or budget_to_gap:<target>)"),
        ))
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::GapAtBudget => f.write_str("gap_at_budget"),
            Metric::BudgetToGap { target } => write!(f, "budget_to_gap:{target}"),
        }
    }
}

fn counter(row: &TraceRow, dim: BudgetDim) -> f64 {
    match dim {
        BudgetDim::ZoCalls => row.zo_calls as f64,
        BudgetDim::CommRounds => row.comm_rounds as f64,
        BudgetDim::FoCalls => row.fo_calls as f64,
        BudgetDim::WallMs => row.wall_ms.unwrap_or(f64::NAN),
        BudgetDim::Steps => row.step as f64,
    }
}

/// The metric on one trace; `INFINITY` when the target is never reached.
pub fn metric_value(trace: &RunTrace, metric: Metric, dim: BudgetDim) -> f64 {
    match metric {
        Metric::GapAtBudget => trace.last().and_then(|r| r.gap).unwrap_or(f64::NAN),
        Metric::BudgetToGap { target } => trace
            .rows
            .iter()
            .find(|r| r.rel_gap.is_some_and(|g| g <= target))
            .map(|r| counter(r, dim))
            .unwrap_or(f64::INFINITY),
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub values: Vec<f64>,
}

impl Summary {
    pub fn of(values: Vec<f64>) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Summary {
            median: quantile(&sorted, 0.5),
            q25: quantile(&sorted, 0.25),
            q75: quantile(&sorted, 0.75),
            values,
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }

    pub fn reached(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub method: Method,
    pub topology: String,
    /// Multiplier on the default step size picked by the grid search (baselines only).
    pub eta_scale: Option<f64>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub metric: Metric,
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
    pub metadata: Vec<(String, String)>,
}

pub const ETA_GRID: [f64; 3] = [0.1, 1.0, 10.0];

impl CompareTable {
    pub fn row(&self, method: Method) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str("method,topology,metric,median,iqr,q25,q75,runs,reached,eta_scale\n");
        for r in &self.rows {
            let s = &r.summary;
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                r.method,
                r.topology,
                self.metric,
                s.median,
                s.iqr(),
                s.q25,
                s.q75,
                s.values.len(),
                s.reached(),
                r.eta_scale.map(|e| e.to_string()).unwrap_or_default(),
            );
        }
        out
    }
}

/// Parses `1..10` (inclusive) or a comma list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::config("--seeds", format!("expected `a..b` or a comma list, got `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

/// Checkpoint count for comparison runs, fine enough to locate a gap crossing.
fn fine_checkpoints(cfg: &RunConfig) -> usize {
    cfg.checkpoints.max(1000)
}

fn run_cells(cells: Vec<(RunConfig, Option<Reference>)>) -> Vec<Result<RunTrace>> {
    let one = |(cfg, reference): (RunConfig, Option<Reference>)| run_with(&cfg, reference.as_ref(), false).map(|r| r.trace);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cells.into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cells.into_iter().map(one).collect()
    }
}

/// Runs every config over every seed and summarizes the metric per method.
/// Baselines without an explicit `eta` are grid-searched over
/// `{0.1, 1, 10} × η₀` and reported at the best median.
pub fn compare(configs: &[RunConfig], metric: Metric, seeds: &[u64]) -> Result<CompareTable> {
    let first = configs.first().ok_or_else(|| Error::config("--methods", "no configurations to compare"))?;
    if let Some(c) = configs.iter().find(|c| c.experiment != first.experiment) {
        return Err(Error::config(
            "experiment",
            format!("all configurations must share an experiment ({} vs {})", first.experiment, c.experiment),
        ));
    }
    if seeds.is_empty() {
        return Err(Error::config("--seeds", "no seeds"));
    }
    let shared_reference = match first.experiment {
        Experiment::Logreg | Experiment::Nesterov => Some(compute_reference(first)?),
        _ => None,
    };

    // (config index, eta scale, seed) cells, keyed so aggregation is order-independent.
    let mut keys = Vec::new();
    let mut cells = Vec::new();
    for (ci, cfg) in configs.iter().enumerate() {
        let grid: Vec<Option<f64>> = match cfg.method {
            Method::Gd | Method::Zogd if cfg.eta.is_none() => ETA_GRID.iter().map(|s| Some(*s)).collect(),
            _ => vec![None],
        };
        for scale in grid {
            for &seed in seeds {
                let mut c = cfg.clone();
                c.seed = seed;
                c.checkpoints = fine_checkpoints(cfg);
                if let Some(s) = scale {
                    c.eta_scale = cfg.eta_scale * s;
                }
                c.validate()?;
                keys.push((ci, scale));
                cells.push((c, shared_reference.clone()));
            }
        }
    }
    let results = run_cells(cells);

    let mut rows = Vec::new();
    for (ci, cfg) in configs.iter().enumerate() {
        let dim = cfg.budget_counter();
        let mut best: Option<CompareRow> = None;
        let mut scales: Vec<Option<f64>> = keys.iter().filter(|k| k.0 == ci).map(|k| k.1).collect();
        scales.dedup();
        for scale in scales {
            let mut values = Vec::new();
            for (key, res) in keys.iter().zip(&results) {
                if *key != (ci, scale) {
                    continue;
                }
                match res {
                    Ok(trace) => values.push(metric_value(trace, metric, dim)),
                    Err(e) if scale.is_some() && !e.is_validation() => values.push(f64::INFINITY),
                    Err(e) => {
                        return Err(Error::config(
                            format!("method {}", cfg.method),
                            format!("run failed: {e}"),
                        ))
                    }
                }
            }
            let row = CompareRow {
                method: cfg.method,
                topology: if cfg.is_network() { cfg.topology.to_string() } else { "-".into() },
                eta_scale: scale,
                summary: Summary::of(values),
            };
            let better = match &best {
                None => true,
                Some(b) => row.summary.median.total_cmp(&b.summary.median).is_lt(),
            };
            if better {
                best = Some(row);
            }
        }
        rows.extend(best);
    }
    let mut metadata = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("experiment".to_string(), first.experiment.to_string()),
        ("metric".to_string(), metric.to_string()),
        ("seeds".to_string(), seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")),
        (
            "baseline_tuning".to_string(),
            "eta0 grid {0.1, 1, 10} x default; best median reported".to_string(),
        ),
        ("budget_counter".to_string(), first.budget_counter().to_string()),
    ];
    for (k, v) in first.to_pairs() {
        if k != "method" && k != "seed" {
            metadata.push((format!("config.{k}"), v));
        }
    }
    Ok(CompareTable {
        metric,
        seeds: seeds.to_vec(),
        rows,
        metadata,
    })
}
