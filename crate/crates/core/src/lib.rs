//! asyncplan - deterministic tooling for asynchronous plan reasoning.
//!
//! Models naturalistic plans as weighted DAGs, computes optimal makespans
//! under infinite and finite resources, synthesizes benchmark instances
//! with gold labels and rendered prompts, and grades free-text answers.

pub mod duration;
pub mod evalstats;
pub mod plan;
pub mod prompt;
pub mod scheduler;
pub mod synth;
mod templates;
pub mod textio;

#[cfg(test)]
pub(crate) mod testutil;

pub use duration::{CanonicalDuration, Duration, FormatStyle, TimeUnit};
pub use plan::{
    build_dag, is_series_parallel, transitive_reduce, Constraint, Node, Plan, PlanDag, Step,
};
pub use scheduler::{
    enumerate_paths, finite_makespan_exact, finite_makespan_heuristic, optimal_makespan, Schedule,
};
