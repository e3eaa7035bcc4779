//! Zeroth-order gradient sliding: the outer accelerated loop, the prox-sliding
//! inner loop, the default parameter schedule, restarts, and the gap bounds.

mod bounds;
mod problem;
mod schedule;
mod solver;

pub use bounds::{suggest_r_delta, theoretical_bound, BoundAt, BoundTerms, SmoothingSuggestion};
pub use problem::{CompositeProblem, NetworkHooks, NonsmoothTerm, OracleSettings, SmoothTerm};
pub use schedule::{big_gamma, big_p, ScheduleInputs, ScheduleValues, SlidingSchedule, StepSchedule, DEFAULT_T_CAP};
pub use solver::{mzosa_run, ps_procedure, zosa_run, Budget, PsOutput, RestartConfig, RunOptions, RunOutput};

pub(crate) use solver::{checkpoint_stride, Recorder};
