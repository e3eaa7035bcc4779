//! Experiment configuration, orchestration, comparisons, and trace output.

mod bench;
mod config;
mod graph;
mod run;

pub use bench::{compare, metric_value, parse_seeds, quantile, CompareRow, CompareTable, Metric, Summary, ETA_GRID};
pub use config::{
    parse_override, parse_pairs, BudgetDim, Experiment, Method, NoiseChoice, RunConfig, StepChoice, DATA_ENV, KEYS,
};
pub use graph::GraphReport;
pub use run::{compute_reference, prepare, run, run_with, schedule_for, Prepared, Reference, RunReport, REFERENCE_STEPS};

#[cfg(test)]
mod tests;
