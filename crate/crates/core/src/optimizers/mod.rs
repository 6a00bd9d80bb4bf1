//! Stochastic Hamiltonian methods, their baselines, step-size schedules and the
//! theoretical bounds they are checked against.

mod bounds;
mod run;
mod schedule;
mod trace;

pub use bounds::{convergence_bound, Bound, BoundKind, TheoryConstants};
pub use run::{
    every, log_grid, run, run_co, run_hgd, run_lsvrhg, run_lsvrhg_restart, run_sgda, run_shgd,
    Algorithm, Monitor, OutputOption, Recording, RunConfig, DIVERGENCE_NORM,
};
pub use schedule::{decreasing_step, Schedule, SwitchKind};
pub use trace::{RunFlag, Trace, TraceRecord};
