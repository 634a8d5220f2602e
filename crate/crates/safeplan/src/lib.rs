//! Conservative planning without an action model.
//!
//! Given only trajectories of successfully executed plans, this crate
//! learns a conservative SAS+ action model (preconditions as the
//! intersection of observed pre-states, effects as the union of observed
//! changes), compiles it with a start/goal pair into an ordinary classical
//! planning problem, and solves that with a built-in complete, optimal
//! planner. Any plan produced this way is safe: it executes and reaches the
//! goal under the real (hidden) model.
//!
//! The price of safety is completeness — with few trajectories the learned
//! model may not admit a plan at all. The [`pac`] module quantifies the
//! trade-off (how many trajectories suffice for a target failure rate), and
//! [`experiment`] measures it empirically; [`audit`] verifies safety
//! mechanically against a known ground truth.

pub mod audit;
pub mod bench;
pub mod compiler;
pub mod experiment;
pub mod io;
pub mod learner;
pub mod pac;
pub mod planner;
pub mod rng;
pub mod sas;

pub use compiler::{compile, CompiledProblem};
pub use learner::{learn, learned_to_model, LearnedModel};
pub use planner::{solve, solve_bfs, Limits, Outcome, SearchResult};
pub use sas::{
    apply, is_applicable, satisfies_goal, validate_plan, Action, ActionModel,
    PartialAssignment, Plan, Problem, State, Trajectory, VariableSpec,
};
