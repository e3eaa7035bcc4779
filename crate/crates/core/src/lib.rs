//! Zeroth-order gradient sliding for composite convex problems `f + g`,
//! where the non-smooth f is reached only through noisy function values and
//! the smooth g through its gradient.
//!
//! The crate also carries the comparison baselines, decentralized
//! (graph-penalized) problem construction, the experiment objectives, and an
//! experiment harness that writes CSV traces.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod oracles;
pub mod problems;
pub mod rng;
pub mod sliding;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{Dgf, FeasibleSet, NormKind, NormPair, ProximalSetup};
pub use oracles::{NoiseKind, NoiseModel, NoisyZeroOrderOracle, SmoothingEstimator};
pub use sliding::{
    mzosa_run, zosa_run, Budget, CompositeProblem, OracleSettings, RestartConfig, RunOptions, RunOutput,
    SlidingSchedule,
};
pub use trace::{Counters, RunTrace, TraceRow};
