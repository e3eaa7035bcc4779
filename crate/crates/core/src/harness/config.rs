//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::Averaging;
use crate::error::{Error, Result};
use crate::network::Topology;
use crate::trace::RunTrace;

pub const DATA_ENV: &str = "SLIDING_OPT_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Synthetic,
    GeomMedian,
    Logreg,
    Nesterov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Zosa,
    Mzosa,
    Gd,
    Zogd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseChoice {
    Zero,
    Uniform,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepChoice {
    Constant,
    InvSqrt,
}

macro_rules! keyword_enum {
    ($ty:ident, $field:literal, { $($name:literal => $variant:ident),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::config(
                        $field,
                        format!("unknown value `{other}`; expected one of {}", [$($name),+].join(", ")),
                    )),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name,)+ })
            }
        }
    };
}

keyword_enum!(Experiment, "experiment", {
    "synthetic" => Synthetic,
    "geom_median" => GeomMedian,
    "logreg" => Logreg,
    "nesterov" => Nesterov,
});
keyword_enum!(Method, "method", { "zosa" => Zosa, "mzosa" => Mzosa, "gd" => Gd, "zogd" => Zogd });
keyword_enum!(NoiseChoice, "noise", { "zero" => Zero, "uniform" => Uniform, "sine" => Sine });
keyword_enum!(StepChoice, "step_rule", { "constant" => Constant, "inv_sqrt" => InvSqrt });

/// Which counter sizes the run when `N` is not given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetDim {
    Steps,
    ZoCalls,
    CommRounds,
    FoCalls,
    WallMs,
}

impl fmt::Display for BudgetDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetDim::Steps => "N",
            BudgetDim::ZoCalls => "max_zo_calls",
            BudgetDim::CommRounds => "max_comm_rounds",
            BudgetDim::FoCalls => "max_fo_calls",
            BudgetDim::WallMs => "max_wall_ms",
        })
    }
}

/// Every recognised key, in echo order.
pub const KEYS: &[&str] = &[
    "experiment",
    "method",
    "seed",
    "n",
    "m",
    "topology",
    "graph_file",
    "R",
    "M",
    "eps",
    "N",
    "max_zo_calls",
    "max_comm_rounds",
    "max_fo_calls",
    "max_wall_ms",
    "r",
    "noise",
    "Delta",
    "omega",
    "L",
    "mu",
    "M_est",
    "c_const",
    "C_const",
    "T_cap",
    "rho0",
    "N0",
    "phases",
    "step_rule",
    "eta",
    "eta_scale",
    "averaging",
    "l1",
    "nesterov_L",
    "curvature_min",
    "data",
    "bound_hint",
    "start",
    "checkpoints",
    "record_wall_time",
    "out_path",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub method: Method,
    pub seed: u64,
    pub n: Option<usize>,
    pub m: usize,
    pub topology: Topology,
    pub graph_file: Option<String>,
    pub penalty_r: Option<f64>,
    pub penalty_m: f64,
    pub eps: f64,
    pub n_outer: Option<usize>,
    pub max_zo_calls: Option<u64>,
    pub max_comm_rounds: Option<u64>,
    pub max_fo_calls: Option<u64>,
    pub max_wall_ms: Option<u64>,
    pub r: Option<f64>,
    pub noise: NoiseChoice,
    pub delta: f64,
    pub omega: f64,
    pub l_override: Option<f64>,
    pub mu_override: Option<f64>,
    pub m_est: Option<f64>,
    pub c_const: f64,
    pub big_c_const: f64,
    pub t_cap: usize,
    pub rho0: Option<f64>,
    pub n0: Option<usize>,
    pub phases: Option<usize>,
    pub step_rule: StepChoice,
    pub eta: Option<f64>,
    pub eta_scale: f64,
    pub averaging: Averaging,
    pub l1: Option<f64>,
    pub nesterov_l: f64,
    pub curvature_min: f64,
    pub data: Option<String>,
    pub bound_hint: Option<f64>,
    pub start: Option<String>,
    pub checkpoints: usize,
    pub record_wall_time: bool,
    pub out_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::Synthetic,
            method: Method::Zosa,
            seed: 0,
            n: None,
            m: 20,
            topology: Topology::Star,
            graph_file: None,
            penalty_r: None,
            penalty_m: 1.0,
            eps: 1e-3,
            n_outer: None,
            max_zo_calls: None,
            max_comm_rounds: None,
            max_fo_calls: None,
            max_wall_ms: None,
            r: None,
            noise: NoiseChoice::Zero,
            delta: 0.0,
            omega: 1.0,
            l_override: None,
            mu_override: None,
            m_est: None,
            c_const: 1.0,
            big_c_const: 1.0,
            t_cap: crate::sliding::DEFAULT_T_CAP,
            rho0: None,
            n0: None,
            phases: None,
            step_rule: StepChoice::InvSqrt,
            eta: None,
            eta_scale: 1.0,
            averaging: Averaging::Last,
            l1: None,
            nesterov_l: 4.0,
            curvature_min: 1.0,
            data: None,
            bound_hint: None,
            start: None,
            checkpoints: 20,
            record_wall_time: false,
            out_path: None,
        }
    }
}

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `key = value`, found `{body}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::config("--set", format!("expected key=value, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_num<T: FromStr>(field: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{v}` as a number")))
}

impl RunConfig {
    /// Later pairs win, so command-line overrides go last.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = &'a (String, String)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::config(k.clone(), "unknown key"));
            }
            map.insert(k.clone(), v.clone());
        }
        let mut c = RunConfig::default();
        for (k, v) in &map {
            let k = k.as_str();
            let v = v.as_str();
            if v.is_empty() {
                continue;
            }
            match k {
                "experiment" => c.experiment = v.parse()?,
                "method" => c.method = v.parse()?,
                "seed" => c.seed = parse_num(k, v)?,
                "n" => c.n = Some(parse_num(k, v)?),
                "m" => c.m = parse_num(k, v)?,
                "topology" => c.topology = v.parse().map_err(|e: Error| Error::config(k, e.to_string()))?,
                "graph_file" => c.graph_file = Some(v.to_string()),
                "R" => c.penalty_r = Some(parse_num(k, v)?),
                "M" => c.penalty_m = parse_num(k, v)?,
                "eps" => c.eps = parse_num(k, v)?,
                "N" => c.n_outer = Some(parse_num(k, v)?),
                "max_zo_calls" => c.max_zo_calls = Some(parse_num(k, v)?),
                "max_comm_rounds" => c.max_comm_rounds = Some(parse_num(k, v)?),
                "max_fo_calls" => c.max_fo_calls = Some(parse_num(k, v)?),
                "max_wall_ms" => c.max_wall_ms = Some(parse_num(k, v)?),
                "r" => c.r = Some(parse_num(k, v)?),
                "noise" => c.noise = v.parse()?,
                "Delta" => c.delta = parse_num(k, v)?,
                "omega" => c.omega = parse_num(k, v)?,
                "L" => c.l_override = Some(parse_num(k, v)?),
                "mu" => c.mu_override = Some(parse_num(k, v)?),
                "M_est" => c.m_est = Some(parse_num(k, v)?),
                "c_const" => c.c_const = parse_num(k, v)?,
                "C_const" => c.big_c_const = parse_num(k, v)?,
                "T_cap" => c.t_cap = parse_num(k, v)?,
                "rho0" => c.rho0 = Some(parse_num(k, v)?),
                "N0" => c.n0 = Some(parse_num(k, v)?),
                "phases" => c.phases = Some(parse_num(k, v)?),
                "step_rule" => c.step_rule = v.parse()?,
                "eta" => c.eta = Some(parse_num(k, v)?),
                "eta_scale" => c.eta_scale = parse_num(k, v)?,
                "averaging" => c.averaging = v.parse().map_err(|e: Error| Error::config(k, e.to_string()))?,
                "l1" => c.l1 = Some(parse_num(k, v)?),
                "nesterov_L" => c.nesterov_l = parse_num(k, v)?,
                "curvature_min" => c.curvature_min = parse_num(k, v)?,
                "data" => c.data = Some(v.to_string()),
                "bound_hint" => c.bound_hint = Some(parse_num(k, v)?),
                "start" => c.start = Some(v.to_string()),
                "checkpoints" => c.checkpoints = parse_num(k, v)?,
                "record_wall_time" => {
                    c.record_wall_time = v
                        .parse()
                        .map_err(|_| Error::config(k, format!("expected true or false, got `{v}`")))?
                }
                "out_path" => c.out_path = Some(v.to_string()),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    /// Reads a config file and applies `key=value` overrides on top.
    /// Reads a config file, or the config echoed into a trace file.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.as_ref().display())))?;
        let mut pairs = if text.lines().any(|l| l.starts_with("# config.")) {
            Self::from_trace_metadata(&RunTrace::from_csv(&text)?)?.to_pairs()
        } else {
            parse_pairs(&text)?
        };
        for o in overrides {
            pairs.push(parse_override(o)?);
        }
        Self::from_pairs(&pairs)
    }

    /// Rebuilds the config echoed into a trace's metadata.
    pub fn from_trace_metadata(trace: &RunTrace) -> Result<Self> {
        let pairs: Vec<(String, String)> = trace
            .metadata
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| (k.to_string(), v.clone())))
            .collect();
        Self::from_pairs(&pairs)
    }

    /// Every field, absent options as empty values.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        fn o<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        let values: Vec<String> = vec![
            self.experiment.to_string(),
            self.method.to_string(),
            self.seed.to_string(),
            o(&self.n),
            self.m.to_string(),
            self.topology.to_string(),
            o(&self.graph_file),
            o(&self.penalty_r),
            self.penalty_m.to_string(),
            self.eps.to_string(),
            o(&self.n_outer),
            o(&self.max_zo_calls),
            o(&self.max_comm_rounds),
            o(&self.max_fo_calls),
            o(&self.max_wall_ms),
            o(&self.r),
            self.noise.to_string(),
            self.delta.to_string(),
            self.omega.to_string(),
            o(&self.l_override),
            o(&self.mu_override),
            o(&self.m_est),
            self.c_const.to_string(),
            self.big_c_const.to_string(),
            self.t_cap.to_string(),
            o(&self.rho0),
            o(&self.n0),
            o(&self.phases),
            self.step_rule.to_string(),
            o(&self.eta),
            self.eta_scale.to_string(),
            self.averaging.to_string(),
            o(&self.l1),
            self.nesterov_l.to_string(),
            self.curvature_min.to_string(),
            o(&self.data),
            o(&self.bound_hint),
            o(&self.start),
            self.checkpoints.to_string(),
            self.record_wall_time.to_string(),
            o(&self.out_path),
        ];
        KEYS.iter().map(|k| k.to_string()).zip(values).collect()
    }

    pub fn dim(&self) -> usize {
        self.n.unwrap_or(match self.experiment {
            Experiment::Nesterov => 50,
            _ => 10,
        })
    }

    pub fn l1(&self) -> f64 {
        self.l1.unwrap_or(match self.experiment {
            Experiment::Synthetic => 0.1,
            Experiment::Logreg => 1e-4,
            Experiment::Nesterov => 1e-3,
            Experiment::GeomMedian => 0.0,
        })
    }

    pub fn is_network(&self) -> bool {
        self.experiment == Experiment::GeomMedian
    }

    /// The counter that sizes the run: `N` if given, otherwise the single budget set.
    pub fn primary_budget(&self) -> Result<BudgetDim> {
        if self.n_outer.is_some() || self.method == Method::Mzosa {
            return Ok(BudgetDim::Steps);
        }
        let set: Vec<BudgetDim> = [
            (self.max_zo_calls.is_some(), BudgetDim::ZoCalls),
            (self.max_comm_rounds.is_some(), BudgetDim::CommRounds),
            (self.max_fo_calls.is_some(), BudgetDim::FoCalls),
            (self.max_wall_ms.is_some(), BudgetDim::WallMs),
        ]
        .into_iter()
        .filter_map(|(on, d)| on.then_some(d))
        .collect();
        match set.as_slice() {
            [] => Err(Error::config("N", "set N or exactly one budget (max_zo_calls, max_comm_rounds, max_fo_calls, max_wall_ms)")),
            [one] => Ok(*one),
            _ => Err(Error::config(
                "budget",
                "without N exactly one budget dimension may be primary",
            )),
        }
    }

    /// The counter used by `budget_to_gap`.
    pub fn budget_counter(&self) -> BudgetDim {
        match self.primary_budget() {
            Ok(BudgetDim::Steps) | Ok(BudgetDim::WallMs) | Err(_) => {
                if self.is_network() {
                    BudgetDim::CommRounds
                } else {
                    BudgetDim::ZoCalls
                }
            }
            Ok(d) => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive("eps", self.eps)?;
        positive("M", self.penalty_m)?;
        positive("c_const", self.c_const)?;
        positive("C_const", self.big_c_const)?;
        positive("eta_scale", self.eta_scale)?;
        for (field, v) in [
            ("R", self.penalty_r),
            ("r", self.r),
            ("L", self.l_override),
            ("rho0", self.rho0),
            ("bound_hint", self.bound_hint),
            ("nesterov_L", Some(self.nesterov_l)),
            ("curvature_min", Some(self.curvature_min)),
        ] {
            if let Some(v) = v {
                positive(field, v)?;
            }
        }
        if let Some(m_est) = self.m_est {
            if !(m_est >= 0.0 && m_est.is_finite()) {
                return Err(Error::config("M_est", format!("must be >= 0, got {m_est}")));
            }
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Error::config("eta", format!("must be >= 0, got {eta}")));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::config("Delta", format!("must be >= 0, got {}", self.delta)));
        }
        if self.noise == NoiseChoice::Zero && self.delta > 0.0 {
            return Err(Error::config("Delta", "Delta > 0 needs noise = uniform or sine"));
        }
        if self.curvature_min > 1.0 {
            return Err(Error::config("curvature_min", "must be <= 1 (the largest curvature)"));
        }
        if let Some(l1) = self.l1 {
            if !(l1 >= 0.0 && l1.is_finite()) {
                return Err(Error::config("l1", format!("must be >= 0, got {l1}")));
            }
        }
        if self.t_cap == 0 {
            return Err(Error::config("T_cap", "must be >= 1"));
        }
        if self.n == Some(0) {
            return Err(Error::config("n", "must be >= 1"));
        }
        if self.n_outer == Some(0) {
            return Err(Error::config("N", "must be >= 1"));
        }
        if self.n0 == Some(0) {
            return Err(Error::config("N0", "must be >= 1"));
        }
        match self.experiment {
            Experiment::GeomMedian => {
                if self.m < 2 {
                    return Err(Error::config("m", "a network needs at least 2 nodes"));
                }
                if self.topology == Topology::Custom && self.graph_file.is_none() {
                    return Err(Error::config("graph_file", "required for topology = custom"));
                }
                if self.topology == Topology::Cycle && self.m < 3 {
                    return Err(Error::config("m", "a cycle needs at least 3 nodes"));
                }
            }
            Experiment::Logreg => {
                if self.data.is_none() {
                    return Err(Error::config("data", "logreg needs a LIBSVM dataset path"));
                }
            }
            Experiment::Nesterov => {
                if self.dim() < 2 {
                    return Err(Error::config("n", "nesterov needs n >= 2"));
                }
            }
            Experiment::Synthetic => {}
        }
        if self.method == Method::Mzosa {
            let mu = self.mu_override.unwrap_or(match self.experiment {
                Experiment::Synthetic => self.curvature_min,
                _ => 0.0,
            });
            if !(mu > 0.0) {
                return Err(Error::config(
                    "mu",
                    format!("mzosa needs a strongly convex smooth part (mu > 0), got {mu}"),
                ));
            }
        }
        if let Some(s) = &self.start {
            let ok = matches!(s.as_str(), "zero" | "corner" | "anchors");
            if !ok || (s == "anchors" && !self.is_network()) {
                return Err(Error::config("start", format!("unsupported start `{s}` for this experiment")));
            }
        }
        let primary = self.primary_budget()?;
        let unsupported = match (self.method, primary) {
            (Method::Gd, BudgetDim::ZoCalls) => Some("gd makes no zeroth-order calls"),
            (Method::Zogd, BudgetDim::FoCalls) => Some("zogd makes no first-order calls"),
            (Method::Zosa, BudgetDim::WallMs) => Some("zosa needs N or a counter budget; T_k depends on N"),
            (_, BudgetDim::CommRounds) if !self.is_network() => Some("only network experiments count communication"),
            _ => None,
        };
        if let Some(why) = unsupported {
            return Err(Error::config(primary.to_string(), why));
        }
        Ok(())
    }

    /// Dataset path, falling back to `$SLIDING_OPT_DATA/<path>`.
    pub fn resolve_data(&self) -> Result<PathBuf> {
        let raw = self.data.as_deref().ok_or_else(|| Error::config("data", "not set"))?;
        let direct = PathBuf::from(raw);
        if direct.exists() {
            return Ok(direct);
        }
        if let Ok(root) = std::env::var(DATA_ENV) {
            let joined = Path::new(&root).join(raw);
            if joined.exists() {
                return Ok(joined);
            }
        }
        Err(Error::config("data", format!("dataset `{raw}` not found (also tried ${DATA_ENV})")))
    }
}
