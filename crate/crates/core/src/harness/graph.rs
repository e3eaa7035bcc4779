use std::fmt::Write as _;

use crate::error::Result;
use crate::network::{Graph, Laplacian};

#[derive(Debug, Clone, PartialEq)]
pub struct GraphReport {
    pub graph: Graph,
    pub laplacian: Laplacian,
}

impl GraphReport {
    pub fn new(graph: Graph) -> Result<Self> {
        let laplacian = Laplacian::build(&graph)?;
        Ok(GraphReport { graph, laplacian })
    }

    pub fn to_text(&self) -> String {
        let l = &self.laplacian;
        let mut out = String::new();
        let _ = writeln!(out, "topology = {}", self.graph.topology);
        let _ = writeln!(out, "m = {}", self.graph.m);
        let _ = writeln!(out, "edges = {}", self.graph.edges.len());
        let _ = writeln!(out, "lambda_max = {:.12}", l.lambda_max);
        let _ = writeln!(out, "lambda_min_plus = {:.12}", l.lambda_min_plus);
        let _ = writeln!(out, "chi = {:.12}", l.chi);
        let spectrum: Vec<String> = l.eigenvalues.iter().map(|v| format!("{:.12}", v.max(0.0))).collect();
        let _ = writeln!(out, "spectrum = {}", spectrum.join(" "));
        out
    }
}
