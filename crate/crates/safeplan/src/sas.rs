//! Ground SAS+ representation: multi-valued state variables, actions with
//! precondition/effect partial assignments, states, plans, and the execution
//! semantics (`is_applicable`, `apply`, `satisfies_goal`, `validate_plan`).
//!
//! All types are immutable after construction and all operations are pure,
//! so everything here is safe to share across threads.

use std::collections::BTreeMap;

use thiserror::Error;

/// Dense variable index. Names live only in [`VariableSpec`].
pub type VarId = u16;
/// Index into a variable's domain.
pub type Val = u16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SasError {
    #[error("variable id {var} out of range (have {limit} variables)")]
    VariableOutOfRange { var: usize, limit: usize },
    #[error("value {val} out of range for variable {var} (domain size {domain_size})")]
    ValueOutOfRange { var: usize, val: usize, domain_size: usize },
    #[error("state has {got} values but {expected} variables are declared")]
    WrongStateLength { got: usize, expected: usize },
    #[error("duplicate entry for variable {var} in partial assignment")]
    DuplicateEntry { var: usize },
    #[error("action `{action}` is not applicable in the given state")]
    NotApplicable { action: String },
    #[error("unknown action `{action}`")]
    UnknownAction { action: String },
    #[error("duplicate action name `{action}`")]
    DuplicateAction { action: String },
    #[error("variable ids must be dense: expected {expected} at position {pos}, found {found}")]
    NonDenseVariableIds { expected: usize, found: usize, pos: usize },
    #[error("variable `{name}` has an empty domain")]
    EmptyDomain { name: String },
    #[error("variable `{name}` repeats value name `{value}`")]
    DuplicateValueName { name: String, value: String },
    #[error("duplicate variable name `{name}`")]
    DuplicateVariableName { name: String },
    #[error("trajectory `{id}` has {states} states and {actions} actions (need states = actions + 1)")]
    BadAlternation { id: String, states: usize, actions: usize },
}

/// One state variable: a display name plus its finite domain of value names.
///
/// `id` always equals the variable's position in the owning model's variable
/// list; it is kept explicit so partial assignments can be checked against
/// the declarations they were built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub id: VarId,
    pub name: String,
    pub value_names: Vec<String>,
}

impl VariableSpec {
    pub fn new(id: VarId, name: impl Into<String>, value_names: Vec<String>) -> Self {
        VariableSpec { id, name: name.into(), value_names }
    }

    pub fn domain_size(&self) -> usize {
        self.value_names.len()
    }

    pub fn value_index(&self, value_name: &str) -> Option<Val> {
        self.value_names.iter().position(|v| v == value_name).map(|i| i as Val)
    }

    fn validate(&self, pos: usize) -> Result<(), SasError> {
        if self.id as usize != pos {
            return Err(SasError::NonDenseVariableIds {
                expected: pos,
                found: self.id as usize,
                pos,
            });
        }
        if self.value_names.is_empty() {
            return Err(SasError::EmptyDomain { name: self.name.clone() });
        }
        for (i, v) in self.value_names.iter().enumerate() {
            if self.value_names[..i].contains(v) {
                return Err(SasError::DuplicateValueName {
                    name: self.name.clone(),
                    value: v.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Checks a variable list for dense ids, unique names, and valid domains.
pub fn validate_variables(vars: &[VariableSpec]) -> Result<(), SasError> {
    for (pos, spec) in vars.iter().enumerate() {
        spec.validate(pos)?;
        if vars[..pos].iter().any(|other| other.name == spec.name) {
            return Err(SasError::DuplicateVariableName { name: spec.name.clone() });
        }
    }
    Ok(())
}

/// A consistent set of `variable = value` pairs, kept sorted by variable id.
/// Used for preconditions, effects, and goals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PartialAssignment {
    entries: Vec<(VarId, Val)>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        PartialAssignment { entries: Vec::new() }
    }

    /// Builds from pairs; rejects repeated variables.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, Val)>) -> Result<Self, SasError> {
        let mut pa = PartialAssignment::new();
        for (var, val) in pairs {
            if pa.get(var).is_some() {
                return Err(SasError::DuplicateEntry { var: var as usize });
            }
            pa.set(var, val);
        }
        Ok(pa)
    }

    pub fn get(&self, var: VarId) -> Option<Val> {
        self.entries
            .binary_search_by_key(&var, |&(v, _)| v)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Inserts or replaces the entry for `var`.
    pub fn set(&mut self, var: VarId, val: Val) {
        match self.entries.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(i) => self.entries[i].1 = val,
            Err(i) => self.entries.insert(i, (var, val)),
        }
    }

    pub fn remove(&mut self, var: VarId) -> Option<Val> {
        match self.entries.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(i) => Some(self.entries.remove(i).1),
            Err(_) => None,
        }
    }

    pub fn entries(&self) -> &[(VarId, Val)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True if every entry of `self` also appears in `other`.
    pub fn is_subset_of(&self, other: &PartialAssignment) -> bool {
        self.entries.iter().all(|&(var, val)| other.get(var) == Some(val))
    }

    pub fn check_against(&self, vars: &[VariableSpec]) -> Result<(), SasError> {
        for &(var, val) in &self.entries {
            let spec = vars.get(var as usize).ok_or(SasError::VariableOutOfRange {
                var: var as usize,
                limit: vars.len(),
            })?;
            if val as usize >= spec.domain_size() {
                return Err(SasError::ValueOutOfRange {
                    var: var as usize,
                    val: val as usize,
                    domain_size: spec.domain_size(),
                });
            }
        }
        Ok(())
    }

    /// Renders as `{x=v, ...}` using display names.
    pub fn render(&self, vars: &[VariableSpec]) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|&(var, val)| match vars.get(var as usize) {
                Some(spec) => format!(
                    "{}={}",
                    spec.name,
                    spec.value_names.get(val as usize).cloned().unwrap_or_else(|| val.to_string())
                ),
                None => format!("?{var}={val}"),
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl FromIterator<(VarId, Val)> for PartialAssignment {
    /// Collects pairs, later entries replacing earlier ones for the same variable.
    fn from_iter<T: IntoIterator<Item = (VarId, Val)>>(iter: T) -> Self {
        let mut pa = PartialAssignment::new();
        for (var, val) in iter {
            pa.set(var, val);
        }
        pa
    }
}

/// A total assignment: one value index per declared variable, in id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    values: Vec<Val>,
}

impl State {
    /// Validated construction against a variable list.
    pub fn new(values: Vec<Val>, vars: &[VariableSpec]) -> Result<Self, SasError> {
        if values.len() != vars.len() {
            return Err(SasError::WrongStateLength { got: values.len(), expected: vars.len() });
        }
        for (i, (&val, spec)) in values.iter().zip(vars).enumerate() {
            if val as usize >= spec.domain_size() {
                return Err(SasError::ValueOutOfRange {
                    var: i,
                    val: val as usize,
                    domain_size: spec.domain_size(),
                });
            }
        }
        Ok(State { values })
    }

    /// Unvalidated construction for callers that build values structurally
    /// (state enumeration, `apply`).
    pub fn from_vec(values: Vec<Val>) -> Self {
        State { values }
    }

    pub fn values(&self) -> &[Val] {
        &self.values
    }

    pub fn get(&self, var: VarId) -> Option<Val> {
        self.values.get(var as usize).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The state as a partial assignment over every variable.
    pub fn to_partial(&self) -> PartialAssignment {
        self.values.iter().enumerate().map(|(i, &v)| (i as VarId, v)).collect()
    }

    pub fn render(&self, vars: &[VariableSpec]) -> String {
        self.to_partial().render(vars)
    }
}

/// A ground action: unique name plus precondition and effect assignments.
///
/// Construction strips effect entries that restate a precondition entry
/// (same variable, same value): under SAS+ semantics they are no-ops, and
/// removing them keeps "effect or no effect on x" a clean case split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    name: String,
    pre: PartialAssignment,
    eff: PartialAssignment,
}

impl Action {
    pub fn new(name: impl Into<String>, pre: PartialAssignment, mut eff: PartialAssignment) -> Self {
        let name = name.into();
        let redundant: Vec<VarId> = eff
            .entries()
            .iter()
            .filter(|&&(var, val)| pre.get(var) == Some(val))
            .map(|&(var, _)| var)
            .collect();
        for var in redundant {
            eff.remove(var);
        }
        Action { name, pre, eff }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pre(&self) -> &PartialAssignment {
        &self.pre
    }

    pub fn eff(&self) -> &PartialAssignment {
        &self.eff
    }

    pub fn check_against(&self, vars: &[VariableSpec]) -> Result<(), SasError> {
        self.pre.check_against(vars)?;
        self.eff.check_against(vars)
    }
}

/// An action model: the variable declarations plus a name-keyed action set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionModel {
    variables: Vec<VariableSpec>,
    actions: BTreeMap<String, Action>,
}

impl ActionModel {
    pub fn new(variables: Vec<VariableSpec>, actions: Vec<Action>) -> Result<Self, SasError> {
        validate_variables(&variables)?;
        let mut map = BTreeMap::new();
        for action in actions {
            action.check_against(&variables)?;
            let name = action.name().to_string();
            if map.insert(name.clone(), action).is_some() {
                return Err(SasError::DuplicateAction { action: name });
            }
        }
        Ok(ActionModel { variables, actions: map })
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    /// Actions in name order.
    pub fn actions(&self) -> &BTreeMap<String, Action> {
        &self.actions
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.get(name)
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    /// Total number of states (product of domain sizes).
    pub fn state_space_size(&self) -> u128 {
        self.variables.iter().map(|v| v.domain_size() as u128).product()
    }

    /// Largest effect size over all actions, at least 1. Used as the
    /// per-step progress bound by the planner heuristic.
    pub fn max_effect_size(&self) -> usize {
        self.actions.values().map(|a| a.eff().len()).max().unwrap_or(0).max(1)
    }

    /// True if both models declare the same variables (names and domains).
    pub fn same_variables(&self, other: &ActionModel) -> bool {
        self.variables == other.variables
    }

    pub fn variable_by_name(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name == name)
    }
}

/// A planning problem: model, total initial state, and partial goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub model: ActionModel,
    pub init: State,
    pub goal: PartialAssignment,
}

impl Problem {
    pub fn new(model: ActionModel, init: State, goal: PartialAssignment) -> Result<Self, SasError> {
        if init.len() != model.variables().len() {
            return Err(SasError::WrongStateLength {
                got: init.len(),
                expected: model.variables().len(),
            });
        }
        State::new(init.values().to_vec(), model.variables())?;
        goal.check_against(model.variables())?;
        Ok(Problem { model, init, goal })
    }
}

/// A plan: a sequence of action names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<String>,
}

impl Plan {
    pub fn new(steps: Vec<String>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// An observed execution: alternating states and action names, starting and
/// ending with a state. The optional goal is carried through serialization
/// but ignored by learning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub id: String,
    pub states: Vec<State>,
    pub actions: Vec<String>,
    pub goal: Option<PartialAssignment>,
}

impl Trajectory {
    pub fn new(
        id: impl Into<String>,
        states: Vec<State>,
        actions: Vec<String>,
        goal: Option<PartialAssignment>,
    ) -> Result<Self, SasError> {
        let id = id.into();
        if states.len() != actions.len() + 1 {
            return Err(SasError::BadAlternation {
                id,
                states: states.len(),
                actions: actions.len(),
            });
        }
        Ok(Trajectory { id, states, actions, goal })
    }

    /// Number of action steps.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn first_state(&self) -> &State {
        &self.states[0]
    }

    pub fn last_state(&self) -> &State {
        self.states.last().expect("trajectory always holds at least one state")
    }

    /// Checks every state for totality and value ranges.
    pub fn check_against(&self, vars: &[VariableSpec]) -> Result<(), SasError> {
        for s in &self.states {
            State::new(s.values().to_vec(), vars)?;
        }
        if let Some(goal) = &self.goal {
            goal.check_against(vars)?;
        }
        Ok(())
    }
}

/// Why a plan failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanFailure {
    /// The step at this index was not applicable in the state reached so far.
    Inapplicable { step: usize },
    /// Every step applied but the final state does not satisfy the goal.
    GoalUnsatisfied,
}

/// Outcome of replaying a plan against a problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub success: bool,
    /// The visited state sequence: init, then one state per applied step.
    /// On an inapplicable step the sequence stops before that step.
    pub states: Vec<State>,
    pub failure: Option<PlanFailure>,
}

impl ValidationReport {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("report always holds the initial state")
    }
}

fn agrees(s: &State, pa: &PartialAssignment) -> Result<bool, SasError> {
    for &(var, val) in pa.entries() {
        match s.get(var) {
            Some(actual) => {
                if actual != val {
                    return Ok(false);
                }
            }
            None => {
                return Err(SasError::VariableOutOfRange { var: var as usize, limit: s.len() })
            }
        }
    }
    Ok(true)
}

/// True iff every precondition entry of `a` agrees with `s`.
pub fn is_applicable(s: &State, a: &Action) -> Result<bool, SasError> {
    agrees(s, a.pre())
}

/// The state reached by applying `a` to `s`: effect entries overwrite, all
/// other variables keep their value. Erroring (rather than silently applying)
/// on an inapplicable action is the safety contract of this crate.
pub fn apply(s: &State, a: &Action) -> Result<State, SasError> {
    if !is_applicable(s, a)? {
        return Err(SasError::NotApplicable { action: a.name().to_string() });
    }
    let mut values = s.values().to_vec();
    for &(var, val) in a.eff().entries() {
        match values.get_mut(var as usize) {
            Some(slot) => *slot = val,
            None => {
                return Err(SasError::VariableOutOfRange { var: var as usize, limit: s.len() })
            }
        }
    }
    Ok(State::from_vec(values))
}

/// True iff every goal entry agrees with `s`.
pub fn satisfies_goal(s: &State, goal: &PartialAssignment) -> Result<bool, SasError> {
    agrees(s, goal)
}

/// Replays `plan` from `prob.init`, reporting the full state sequence and,
/// on failure, the first failing step and reason. Unknown action names are a
/// resolution error, not a report failure.
pub fn validate_plan(plan: &Plan, prob: &Problem) -> Result<ValidationReport, SasError> {
    let mut states = Vec::with_capacity(plan.len() + 1);
    states.push(prob.init.clone());
    for (step, name) in plan.steps.iter().enumerate() {
        let action = prob
            .model
            .action(name)
            .ok_or_else(|| SasError::UnknownAction { action: name.clone() })?;
        let current = states.last().expect("states is never empty");
        if !is_applicable(current, action)? {
            return Ok(ValidationReport {
                success: false,
                states,
                failure: Some(PlanFailure::Inapplicable { step }),
            });
        }
        let next = apply(current, action)?;
        states.push(next);
    }
    let reached_goal = satisfies_goal(states.last().expect("states is never empty"), &prob.goal)?;
    Ok(ValidationReport {
        success: reached_goal,
        states,
        failure: if reached_goal { None } else { Some(PlanFailure::GoalUnsatisfied) },
    })
}
