//! Graphs, Laplacians, and the penalized decentralized problem.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{FeasibleSet, ProximalSetup};
use crate::oracles::{GradFn, ValueFn};
use crate::sliding::{CompositeProblem, NetworkHooks, NonsmoothTerm, OracleSettings, SmoothTerm};

pub const MAX_NODES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Star,
    Complete,
    Chain,
    Cycle,
    Custom,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Star => "star",
            Topology::Complete => "complete",
            Topology::Chain => "chain",
            Topology::Cycle => "cycle",
            Topology::Custom => "custom",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Topology::Star),
            "complete" => Ok(Topology::Complete),
            "chain" | "path" => Ok(Topology::Chain),
            "cycle" | "ring" => Ok(Topology::Cycle),
            "custom" => Ok(Topology::Custom),
            other => Err(Error::invalid(
                "topology",
                format!("unknown topology `{other}` (star, complete, chain, cycle, custom)"),
            )),
        }
    }
}

/// Connected undirected graph without self-loops or duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub m: usize,
    /// Edges with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub topology: Topology,
}

impl Graph {
    pub fn new(m: usize, edges: &[(usize, usize)], topology: Topology) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("m", format!("need at least 2 nodes, got {m}")));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::invalid("edges", format!("edge ({a}, {b}) out of range for m = {m}")));
            }
            if a == b {
                return Err(Error::invalid("edges", format!("self-loop at node {a}")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid("edges", format!("duplicate edge ({a}, {b})")));
            }
        }
        let g = Graph {
            m,
            edges: set.into_iter().collect(),
            topology,
        };
        let comps = g.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected { components: comps });
        }
        Ok(g)
    }

    pub fn build(topology: Topology, m: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = match topology {
            Topology::Star => (1..m).map(|i| (0, i)).collect(),
            Topology::Complete => (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect(),
            Topology::Chain => (1..m).map(|i| (i - 1, i)).collect(),
            Topology::Cycle => {
                if m < 3 {
                    return Err(Error::invalid("m", "a cycle needs at least 3 nodes"));
                }
                (0..m).map(|i| (i, (i + 1) % m)).collect()
            }
            Topology::Custom => {
                return Err(Error::invalid("topology", "custom graphs come from an edge list"));
            }
        };
        Graph::new(m, &edges, topology)
    }

    pub fn star(m: usize) -> Result<Self> {
        Self::build(Topology::Star, m)
    }

    pub fn complete(m: usize) -> Result<Self> {
        Self::build(Topology::Complete, m)
    }

    pub fn chain(m: usize) -> Result<Self> {
        Self::build(Topology::Chain, m)
    }

    pub fn cycle(m: usize) -> Result<Self> {
        Self::build(Topology::Cycle, m)
    }

    /// Parses `i j` pairs (0-indexed, `#` comments). The node count is
    /// `m` if given, otherwise one more than the largest index.
    pub fn from_edge_list(text: &str, m: Option<usize>) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(err(format!("expected `i j`, found `{body}`")));
            }
            let a: usize = toks[0].parse().map_err(|_| err(format!("bad node index `{}`", toks[0])))?;
            let b: usize = toks[1].parse().map_err(|_| err(format!("bad node index `{}`", toks[1])))?;
            edges.push((a, b));
        }
        let inferred = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Graph::new(m.unwrap_or(inferred), &edges, Topology::Custom)
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.m];
        for &(a, b) in &self.edges {
            nb[a].push(b);
            nb[b].push(a);
        }
        nb
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let nb = self.neighbors();
        let mut seen = vec![false; self.m];
        let mut comps = Vec::new();
        for start in 0..self.m {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &nb[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }
}

/// Graph Laplacian `W̄ = D − A` with its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub w_bar: Vec<Vec<f64>>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_max: f64,
    pub lambda_min_plus: f64,
    pub chi: f64,
}

impl Laplacian {
    pub fn build(graph: &Graph) -> Result<Self> {
        let m = graph.m;
        if m > MAX_NODES {
            return Err(Error::invalid("m", format!("dense spectra are limited to {MAX_NODES} nodes")));
        }
        let comps = graph.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected { components: comps });
        }
        let mut w = vec![vec![0.0; m]; m];
        for &(a, b) in &graph.edges {
            w[a][b] = -1.0;
            w[b][a] = -1.0;
            w[a][a] += 1.0;
            w[b][b] += 1.0;
        }
        let dense = nalgebra::DMatrix::from_fn(m, m, |i, j| w[i][j]);
        let mut eigenvalues: Vec<f64> = dense.symmetric_eigenvalues().iter().cloned().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let lambda_max = *eigenvalues.last().expect("m >= 2");
        let lambda_min_plus = eigenvalues
            .iter()
            .cloned()
            .find(|&v| v > 1e-9 * lambda_max)
            .expect("a connected graph has a positive eigenvalue");
        Ok(Laplacian {
            w_bar: w,
            eigenvalues,
            lambda_max,
            lambda_min_plus,
            chi: lambda_max / lambda_min_plus,
        })
    }
}

/// `R = M² / (m λ⁺_min ε)`.
pub fn penalty_coefficient(m_lip: f64, m: usize, lambda_min_plus: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps", "must be positive"));
    }
    Ok(m_lip * m_lip / (m as f64 * lambda_min_plus * eps))
}

/// `W = W̄ ⊗ Iₙ` applied blockwise, counting one communication round per call.
#[derive(Debug)]
pub struct WOperator {
    neighbors: Vec<Vec<usize>>,
    n: usize,
    rounds: Arc<AtomicU64>,
}

impl WOperator {
    pub fn m(&self) -> usize {
        self.neighbors.len()
    }

    pub fn rounds(&self) -> u64 {
        self.rounds.load(Ordering::Relaxed)
    }

    pub fn counter(&self) -> Arc<AtomicU64> {
        self.rounds.clone()
    }

    /// `(W x)_i = deg(i) x_i − Σ_{j ~ i} x_j`, not counted.
    pub fn apply_uncounted(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        check_dim(n * self.m(), x.len())?;
        let mut out = vec![0.0; x.len()];
        for (i, nb) in self.neighbors.iter().enumerate() {
            let oi = &mut out[i * n..(i + 1) * n];
            let xi = &x[i * n..(i + 1) * n];
            let deg = nb.len() as f64;
            for (o, v) in oi.iter_mut().zip(xi) {
                *o = deg * v;
            }
            for &j in nb {
                for (o, v) in oi.iter_mut().zip(&x[j * n..(j + 1) * n]) {
                    *o -= v;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = self.apply_uncounted(x)?;
        self.rounds.fetch_add(1, Ordering::Relaxed);
        Ok(out)
    }

    /// `⟨x, W x⟩ = ‖√W x‖²`, not counted.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        Ok(crate::linalg::dot(x, &self.apply_uncounted(x)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusViolation {
    pub sq_norm_wx: f64,
    pub sq_norm_sqrt_wx: f64,
}

/// Per-node objectives over a graph with penalty weight R.
pub struct NetworkProblem {
    pub graph: Graph,
    pub laplacian: Laplacian,
    pub n: usize,
    pub nodes: Vec<(ValueFn, Option<GradFn>)>,
    /// ℓ₂ Lipschitz bound shared by every node objective.
    pub node_lipschitz: f64,
    pub r_penalty: f64,
    pub w: Arc<WOperator>,
}

impl NetworkProblem {
    pub fn new(
        graph: Graph,
        n: usize,
        nodes: Vec<(ValueFn, Option<GradFn>)>,
        node_lipschitz: f64,
        r_penalty: f64,
    ) -> Result<Self> {
        check_dim(graph.m, nodes.len())?;
        if n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if !(r_penalty > 0.0 && r_penalty.is_finite()) {
            return Err(Error::invalid("R", format!("must be positive, got {r_penalty}")));
        }
        let laplacian = Laplacian::build(&graph)?;
        let w = Arc::new(WOperator {
            neighbors: graph.neighbors(),
            n,
            rounds: Arc::new(AtomicU64::new(0)),
        });
        Ok(NetworkProblem {
            graph,
            laplacian,
            n,
            nodes,
            node_lipschitz,
            r_penalty,
            w,
        })
    }

    pub fn m(&self) -> usize {
        self.graph.m
    }

    pub fn comm_rounds(&self) -> u64 {
        self.w.rounds()
    }

    /// `L = 2 R λ_max`.
    pub fn l_penalty(&self) -> f64 {
        2.0 * self.r_penalty * self.laplacian.lambda_max
    }

    pub fn apply_w(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.w.apply(x)
    }

    pub fn consensus_violation(&self, x: &[f64]) -> Result<ConsensusViolation> {
        let wx = self.w.apply_uncounted(x)?;
        Ok(ConsensusViolation {
            sq_norm_wx: crate::linalg::dot(&wx, &wx),
            sq_norm_sqrt_wx: crate::linalg::dot(x, &wx),
        })
    }

    /// `(x, …, x)` repeated m times.
    pub fn stack(&self, x: &[f64]) -> Vec<f64> {
        x.iter().cloned().cycle().take(x.len() * self.m()).collect()
    }

    /// Mean of the node blocks.
    pub fn average(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for block in x.chunks(n) {
            for (o, v) in out.iter_mut().zip(block) {
                *o += v / self.m() as f64;
            }
        }
        out
    }

    /// Penalized problem over ℝ^{nm}: `f(x) = (1/m) Σ fᵢ(xᵢ)`, `g(x) = R⟨x, W x⟩`.
    /// `node_set` must be a box or the whole space; it is repeated per node.
    pub fn lift_to_penalized(&self, node_set: &FeasibleSet, oracle: &OracleSettings, seed: u64) -> Result<CompositeProblem> {
        check_dim(self.n, node_set.dim())?;
        let m = self.m();
        let sqrt_m = (m as f64).sqrt();
        let set = match node_set {
            FeasibleSet::Box { lo, hi } => FeasibleSet::boxed(lo.repeat(m), hi.repeat(m))?,
            FeasibleSet::WholeSpace { bound_hint, .. } => FeasibleSet::whole_space(self.n * m, bound_hint * sqrt_m)?,
            _ => {
                return Err(Error::invalid(
                    "set",
                    "only box and whole_space node sets can be stacked",
                ))
            }
        };
        let n = self.n;
        let nodes: Vec<ValueFn> = self.nodes.iter().map(|(v, _)| v.clone()).collect();
        let f_value: ValueFn = Arc::new(move |x: &[f64]| {
            nodes.iter().zip(x.chunks(n)).map(|(f, xi)| f(xi)).sum::<f64>() / nodes.len() as f64
        });
        let subgrad: Option<GradFn> = if self.nodes.iter().all(|(_, g)| g.is_some()) {
            let grads: Vec<GradFn> = self.nodes.iter().map(|(_, g)| g.clone().unwrap()).collect();
            Some(Arc::new(move |x: &[f64]| {
                let scale = 1.0 / grads.len() as f64;
                grads
                    .iter()
                    .zip(x.chunks(n))
                    .flat_map(|(g, xi)| g(xi).into_iter().map(move |v| v * scale))
                    .collect()
            }))
        } else {
            None
        };
        let f = NonsmoothTerm {
            value: f_value,
            subgrad,
            lipschitz: self.node_lipschitz / sqrt_m,
        };
        let r = self.r_penalty;
        let (w1, w2, w3) = (self.w.clone(), self.w.clone(), self.w.clone());
        let g = SmoothTerm {
            value: Arc::new(move |x: &[f64]| r * w1.quad_form(x).unwrap_or(f64::NAN)),
            grad: Arc::new(move |x: &[f64]| match w2.apply(x) {
                Ok(wx) => wx.into_iter().map(|v| 2.0 * r * v).collect(),
                Err(_) => vec![f64::NAN; x.len()],
            }),
            lipschitz: self.l_penalty(),
            strong_convexity: 0.0,
        };
        let mut problem = CompositeProblem::new(ProximalSetup::euclidean(set), g, f, oracle, seed)?;
        problem.network = Some(NetworkHooks {
            comm_rounds: self.w.counter(),
            consensus_sq_norm: Arc::new(move |x: &[f64]| w3.quad_form(x).unwrap_or(f64::NAN)),
        });
        problem.notes.push((
            "zo_calls_per_node".into(),
            format!("zo_calls counts evaluations of the average over {m} nodes; each queries every node once"),
        ));
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use rand::Rng;

    /// Cyclic Jacobi eigenvalue iteration; returns (eigenvalues, eigenvectors as columns).
    fn jacobi(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = a.len();
        let mut a = a.to_vec();
        let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    for row in v.iter_mut() {
                        let (vp, vq) = (row[p], row[q]);
                        row[p] = c * vp - s * vq;
                        row[q] = s * vp + c * vq;
                    }
                }
            }
        }
        ((0..n).map(|i| a[i][i]).collect(), v)
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn complete_graph_spectrum() {
        for m in 3..=8 {
            let lap = Laplacian::build(&Graph::complete(m).unwrap()).unwrap();
            let (ev, _) = jacobi(&lap.w_bar);
            let ev = sorted(ev);
            assert!(ev[0].abs() < 1e-10);
            assert!(ev[1..].iter().all(|v| (v - m as f64).abs() < 1e-10));
            assert!((lap.chi - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn star_three() {
        let lap = Laplacian::build(&Graph::star(3).unwrap()).unwrap();
        assert_eq!(lap.w_bar, vec![vec![2.0, -1.0, -1.0], vec![-1.0, 1.0, 0.0], vec![-1.0, 0.0, 1.0]]);
        let ev = sorted(jacobi(&lap.w_bar).0);
        for (a, b) in ev.iter().zip([0.0, 1.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((lap.chi - 3.0).abs() < 1e-10);
    }

    #[test]
    fn cycle_and_chain_spectra_match_brute_force() {
        for m in 3..=12 {
            for g in [Graph::cycle(m).unwrap(), Graph::chain(m).unwrap()] {
                let lap = Laplacian::build(&g).unwrap();
                let ev = sorted(jacobi(&lap.w_bar).0);
                let plus = ev.iter().cloned().find(|v| *v > 1e-9).unwrap();
                let chi = ev.last().unwrap() / plus;
                assert!((chi - lap.chi).abs() < 5e-3, "{} m={m}: {chi} vs {}", g.topology, lap.chi);
            }
        }
    }

    #[test]
    fn rows_sum_to_zero() {
        for g in [Graph::star(7).unwrap(), Graph::cycle(9).unwrap(), Graph::complete(5).unwrap()] {
            let lap = Laplacian::build(&g).unwrap();
            assert!(lap.w_bar.iter().all(|row| row.iter().sum::<f64>() == 0.0));
        }
    }

    #[test]
    fn disconnected_graph_lists_components() {
        match Graph::new(4, &[(0, 1), (2, 3)], Topology::Custom) {
            Err(Error::Disconnected { components }) => assert_eq!(components, vec![vec![0, 1], vec![2, 3]]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Graph::new(3, &[(0, 0), (1, 2)], Topology::Custom).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0), (1, 2)], Topology::Custom).is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let g = Graph::from_edge_list("# triangle\n0 1\n1 2 # tail\n\n2 0\n", None).unwrap();
        assert_eq!(g.m, 3);
        assert_eq!(g.edges, vec![(0, 1), (0, 2), (1, 2)]);
        match Graph::from_edge_list("0 1\n1\n", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn zero_nodes(m: usize) -> Vec<(ValueFn, Option<GradFn>)> {
        (0..m).map(|_| (Arc::new(|_: &[f64]| 0.0) as ValueFn, None)).collect()
    }

    #[test]
    fn chain_two_example() {
        let net = NetworkProblem::new(Graph::chain(2).unwrap(), 1, zero_nodes(2), 1.0, 1.0).unwrap();
        assert_eq!(net.apply_w(&[1.0, 0.0]).unwrap(), vec![1.0, -1.0]);
        assert_eq!(net.comm_rounds(), 1);
        let settings = OracleSettings {
            noise: crate::oracles::NoiseKind::Zero,
            r: 0.01,
            s: None,
            p_star: None,
        };
        let mut p = net
            .lift_to_penalized(&FeasibleSet::whole_space(1, 1.0).unwrap(), &settings, 0)
            .unwrap();
        assert_eq!((p.g.value)(&[1.0, 0.0]), 1.0);
        assert_eq!(net.comm_rounds(), 1);
        assert_eq!(p.grad_g(&[0.5, 0.5]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(p.comm_rounds(), 2);
        assert_eq!(p.counters().fo_calls, 1);
        assert_eq!(p.consensus_sq_norm(&[1.0, 0.0]), Some(1.0));
        assert_eq!(p.comm_rounds(), 2);
    }

    #[test]
    fn blockwise_matches_dense_kronecker() {
        let mut rng = stream(1, Stream::Start);
        for m in 2..=6 {
            for n in 1..=6 {
                let g = Graph::chain(m).unwrap();
                let mut edges = g.edges.clone();
                for i in 0..m {
                    for j in i + 2..m {
                        if rng.random_bool(0.3) {
                            edges.push((i, j));
                        }
                    }
                }
                let g = Graph::new(m, &edges, Topology::Custom).unwrap();
                let net = NetworkProblem::new(g, n, zero_nodes(m), 1.0, 1.0).unwrap();
                let w = &net.laplacian.w_bar;
                let x: Vec<f64> = (0..n * m).map(|_| rng.random_range(-3.0..3.0)).collect();
                let dense: Vec<f64> = (0..n * m)
                    .map(|row| {
                        (0..n * m)
                            .map(|col| {
                                let kron = w[row / n][col / n] * if row % n == col % n { 1.0 } else { 0.0 };
                                kron * x[col]
                            })
                            .sum()
                    })
                    .collect();
                let got = net.apply_w(&x).unwrap();
                for (a, b) in got.iter().zip(&dense) {
                    assert!((a - b).abs() <= 1e-12);
                }
                let (vals, vecs) = jacobi(w);
                let mut sqrt_norm = 0.0;
                for k in 0..n {
                    let xk: Vec<f64> = (0..m).map(|i| x[i * n + k]).collect();
                    for (col, lam) in vals.iter().enumerate() {
                        let proj: f64 = (0..m).map(|i| vecs[i][col] * xk[i]).sum();
                        sqrt_norm += lam.max(0.0) * proj * proj;
                    }
                }
                let cv = net.consensus_violation(&x).unwrap();
                assert!((cv.sq_norm_sqrt_wx - sqrt_norm).abs() <= 1e-10 * sqrt_norm.max(1.0));
                assert!((cv.sq_norm_wx - crate::linalg::dot(&got, &got)).abs() <= 1e-12 * cv.sq_norm_wx.max(1.0));
            }
        }
    }

    #[test]
    fn consensus_equivalence() {
        let net = NetworkProblem::new(Graph::cycle(5).unwrap(), 3, zero_nodes(5), 1.0, 2.0).unwrap();
        let x = net.stack(&[0.3, -1.2, 4.0]);
        assert!(net.apply_w(&x).unwrap().iter().all(|v| v.abs() < 1e-10));
        assert!(net.consensus_violation(&x).unwrap().sq_norm_sqrt_wx.abs() < 1e-10);
        let mut y = x.clone();
        y[4] += 1e-3;
        assert!(net.apply_w(&y).unwrap().iter().any(|v| v.abs() > 1e-10));
        assert!(net.consensus_violation(&y).unwrap().sq_norm_sqrt_wx > 1e-10);
        let mut rng = stream(2, Stream::Start);
        for _ in 0..1000 {
            let z: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(net.consensus_violation(&z).unwrap().sq_norm_sqrt_wx >= -1e-12);
        }
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty_coefficient(1.0, 1, 1.0, 1.0).unwrap(), 1.0);
        let star = Laplacian::build(&Graph::star(3).unwrap()).unwrap();
        let r = penalty_coefficient(2.0, 3, star.lambda_min_plus, 0.1).unwrap();
        assert!((r - 40.0 / 3.0).abs() < 1e-9);
        let r2 = penalty_coefficient(2.0, 3, star.lambda_min_plus, 0.2).unwrap();
        assert!((r2 - r / 2.0).abs() < 1e-12);
        assert!(penalty_coefficient(1.0, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn lifted_scalings() {
        let inst = crate::problems::GeometricMedianInstance::generate(4, 2, 0).unwrap();
        let nodes = inst.node_functions().into_iter().map(|(v, g)| (v, Some(g))).collect();
        let net = NetworkProblem::new(Graph::star(4).unwrap(), 2, nodes, 1.0, 10.0).unwrap();
        let settings = OracleSettings {
            noise: crate::oracles::NoiseKind::Zero,
            r: 0.01,
            s: None,
            p_star: None,
        };
        let node_set = FeasibleSet::cube(2, 5.0).unwrap();
        let p = net.lift_to_penalized(&node_set, &settings, 0).unwrap();
        assert_eq!(p.dim(), 8);
        assert!((p.f.lipschitz - 0.5).abs() < 1e-15);
        assert!((p.g.lipschitz - 2.0 * 10.0 * 4.0).abs() < 1e-9);
        let per_node = node_set.diameter(&crate::geometry::NormPair::euclidean());
        assert!((p.setup.d_x - 2.0 * per_node).abs() < 1e-12);
        let x = net.stack(&[0.5, 0.5]);
        assert!((p.psi0(&x) - inst.objective(&[0.5, 0.5])).abs() < 1e-14);
        assert!(net.lift_to_penalized(&FeasibleSet::simplex(2).unwrap(), &settings, 0).is_err());
    }
}
