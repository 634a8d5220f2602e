//! Compilation of a learned model plus a start/goal pair into a classical
//! planning problem. Deliberately a thin, total wrapper: all modelling
//! intelligence sits in the learner, so the safety argument for the
//! compiled problem is exactly the safety argument for the learned bounds.

use crate::learner::{learned_to_model, LearnedModel};
use crate::sas::{PartialAssignment, Problem, SasError, State};

/// A compiled problem: the learned actions with the original variables,
/// start state, and goal. `provenance` ties the problem back to the learned
/// model and corpus it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledProblem {
    pub problem: Problem,
    pub provenance: String,
}

/// Builds the compiled problem. Init and goal pass through unchanged; the
/// action set is exactly the observed actions under their learned bounds.
pub fn compile(
    lm: &LearnedModel,
    init: State,
    goal: PartialAssignment,
) -> Result<CompiledProblem, SasError> {
    let model = learned_to_model(lm)?;
    let problem = Problem::new(model, init, goal)?;
    Ok(CompiledProblem {
        problem,
        provenance: format!("{} (m={})", lm.id, lm.trajectory_count),
    })
}
