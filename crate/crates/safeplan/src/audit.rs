//! Mechanical verification of learned-model safety against a known ground
//! truth, plus containment checks for the learned bounds.
//!
//! Safety here is the strong form: for every state (not just reachable
//! ones) and every learned action, applicability under the learned model
//! must imply applicability under the truth, and both models must produce
//! exactly the same successor. Violations come back as replayable
//! counterexamples.

use serde::Serialize;
use thiserror::Error;

use crate::learner::{extract_triplets, LearnedModel};
use crate::rng::stream;
use crate::sas::{self, ActionModel, SasError, State, Trajectory, Val};
use rand::Rng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("the two models declare different variables")]
    VariableMismatch,
    #[error(
        "state space has {size} states, above the exhaustive cap of {cap}; \
         rerun in sampled mode"
    )]
    StateSpaceTooLarge { size: u128, cap: u64 },
    #[error(transparent)]
    Sas(#[from] SasError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AuditMode {
    Exhaustive { cap: u64 },
    Sampled { samples: u64, seed: u64 },
}

impl AuditMode {
    /// Exhaustive enumeration under the default desk-scale cap.
    pub fn exhaustive() -> Self {
        AuditMode::Exhaustive { cap: 50_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Applicable under the learned model but not under the truth.
    InapplicableUnderTruth,
    /// Applicable under both, but the successors differ.
    StateMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Raw value indices of the witness state, for replay.
    pub state: Vec<Val>,
    pub state_rendered: String,
    pub action: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SafetyReport {
    pub safe: bool,
    pub states_checked: u64,
    #[serde(flatten)]
    pub mode: AuditMode,
    pub counterexample: Option<Counterexample>,
}

/// Decodes a mixed-radix state index (variable 0 most significant).
fn state_at_index(sizes: &[usize], mut index: u128) -> State {
    let mut values = vec![0 as Val; sizes.len()];
    for (slot, &size) in values.iter_mut().zip(sizes).rev() {
        *slot = (index % size as u128) as Val;
        index /= size as u128;
    }
    State::from_vec(values)
}

fn check_state(
    state: &State,
    learned: &ActionModel,
    truth: &ActionModel,
) -> Result<Option<Counterexample>, SasError> {
    for (name, learned_action) in learned.actions() {
        if !sas::is_applicable(state, learned_action)? {
            continue;
        }
        let witness = |kind| Counterexample {
            state: state.values().to_vec(),
            state_rendered: state.render(truth.variables()),
            action: name.clone(),
            kind,
        };
        let Some(truth_action) = truth.action(name) else {
            return Ok(Some(witness(ViolationKind::InapplicableUnderTruth)));
        };
        if !sas::is_applicable(state, truth_action)? {
            return Ok(Some(witness(ViolationKind::InapplicableUnderTruth)));
        }
        if sas::apply(state, learned_action)? != sas::apply(state, truth_action)? {
            return Ok(Some(witness(ViolationKind::StateMismatch)));
        }
    }
    Ok(None)
}

/// Checks the learned model against the truth over every state (exhaustive
/// mode) or a uniform sample of states. Scanning is in state-index order, so
/// the reported counterexample is the lowest-index violation.
pub fn audit_safety(
    learned: &ActionModel,
    truth: &ActionModel,
    mode: AuditMode,
) -> Result<SafetyReport, AuditError> {
    if learned.variables() != truth.variables() {
        return Err(AuditError::VariableMismatch);
    }
    let sizes: Vec<usize> = truth.variables().iter().map(|v| v.domain_size()).collect();
    let mut states_checked = 0u64;
    let mut found = None;

    match mode {
        AuditMode::Exhaustive { cap } => {
            let total = truth.state_space_size();
            if total > cap as u128 {
                return Err(AuditError::StateSpaceTooLarge { size: total, cap });
            }
            for index in 0..total {
                let state = state_at_index(&sizes, index);
                states_checked += 1;
                if let Some(cx) = check_state(&state, learned, truth)? {
                    found = Some(cx);
                    break;
                }
            }
        }
        AuditMode::Sampled { samples, seed } => {
            let mut rng = stream(seed, &[]);
            for _ in 0..samples {
                let values: Vec<Val> =
                    sizes.iter().map(|&s| rng.gen_range(0..s) as Val).collect();
                let state = State::from_vec(values);
                states_checked += 1;
                if let Some(cx) = check_state(&state, learned, truth)? {
                    found = Some(cx);
                    break;
                }
            }
        }
    }
    Ok(SafetyReport { safe: found.is_none(), states_checked, mode, counterexample: found })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsViolationKind {
    /// A true precondition entry is missing from the learned upper bound.
    PreNotContained,
    /// A learned effect entry is not a true effect.
    EffLowerNotContained,
    /// A true effect entry is absent from some observed post-state.
    EffNotInPostIntersection,
    /// The learned action does not exist in the truth model at all.
    UnknownTruthAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsViolation {
    pub action: String,
    pub kind: BoundsViolationKind,
    pub entry: Option<(usize, usize)>,
    pub entry_rendered: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub actions_checked: u64,
    pub violations: Vec<BoundsViolation>,
}

impl BoundsReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies the learned bounds per observed action: the true precondition
/// is contained in the learned upper bound, the learned effects are true
/// effects, and every true effect value appears in all observed post-states.
/// Unobserved truth actions are skipped.
pub fn audit_bounds(
    lm: &LearnedModel,
    truth: &ActionModel,
    trajs: &[Trajectory],
) -> Result<BoundsReport, AuditError> {
    if lm.variables != truth.variables() {
        return Err(AuditError::VariableMismatch);
    }
    let vars = truth.variables();
    let render = |var: u16, val: u16| {
        let spec = &vars[var as usize];
        format!("{}={}", spec.name, spec.value_names[val as usize])
    };
    let triplets = extract_triplets(trajs);
    let mut violations = Vec::new();
    let mut actions_checked = 0u64;

    for (name, la) in &lm.actions {
        actions_checked += 1;
        let Some(truth_action) = truth.action(name) else {
            violations.push(BoundsViolation {
                action: name.clone(),
                kind: BoundsViolationKind::UnknownTruthAction,
                entry: None,
                entry_rendered: String::new(),
            });
            continue;
        };
        for &(var, val) in truth_action.pre().entries() {
            if la.pre_upper.get(var) != Some(val) {
                violations.push(BoundsViolation {
                    action: name.clone(),
                    kind: BoundsViolationKind::PreNotContained,
                    entry: Some((var as usize, val as usize)),
                    entry_rendered: render(var, val),
                });
            }
        }
        for &(var, val) in la.eff_lower.entries() {
            if truth_action.eff().get(var) != Some(val) {
                violations.push(BoundsViolation {
                    action: name.clone(),
                    kind: BoundsViolationKind::EffLowerNotContained,
                    entry: Some((var as usize, val as usize)),
                    entry_rendered: render(var, val),
                });
            }
        }
        if let Some(observed) = triplets.get(name) {
            for &(var, val) in truth_action.eff().entries() {
                let in_all_posts =
                    observed.iter().all(|t| t.post_state.get(var) == Some(val));
                if !in_all_posts {
                    violations.push(BoundsViolation {
                        action: name.clone(),
                        kind: BoundsViolationKind::EffNotInPostIntersection,
                        entry: Some((var as usize, val as usize)),
                        entry_rendered: render(var, val),
                    });
                }
            }
        }
    }
    Ok(BoundsReport { actions_checked, violations })
}
