//! JSON schemas for domains, problems, and learned models.
//!
//! Serialization is canonical: actions sorted by name, assignment maps keyed
//! by variable name (sorted), struct fields in a fixed order, two-space
//! pretty printing, trailing newline. `serialize(parse(x))` is a fixed point
//! for every valid input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_version, FormatError, SCHEMA_VERSION};
use crate::learner::{LearnedAction, LearnedModel};
use crate::sas::{
    validate_variables, Action, ActionModel, PartialAssignment, Problem, State, VariableSpec,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableFile {
    name: String,
    values: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionFile {
    name: String,
    #[serde(default)]
    pre: BTreeMap<String, String>,
    #[serde(default)]
    eff: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    schema_version: u32,
    variables: Vec<VariableFile>,
    #[serde(default)]
    actions: Vec<ActionFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    schema_version: u32,
    domain: DomainBody,
    init: BTreeMap<String, String>,
    goal: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainBody {
    variables: Vec<VariableFile>,
    #[serde(default)]
    actions: Vec<ActionFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnedActionFile {
    name: String,
    pre_upper: BTreeMap<String, String>,
    eff_lower: BTreeMap<String, String>,
    observations: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LearnedFile {
    schema_version: u32,
    id: String,
    trajectory_count: u64,
    variables: Vec<VariableFile>,
    actions: Vec<LearnedActionFile>,
}

fn vars_to_file(vars: &[VariableSpec]) -> Vec<VariableFile> {
    vars.iter()
        .map(|v| VariableFile { name: v.name.clone(), values: v.value_names.clone() })
        .collect()
}

fn vars_from_file(vars: Vec<VariableFile>) -> Result<Vec<VariableSpec>, FormatError> {
    let specs: Vec<VariableSpec> = vars
        .into_iter()
        .enumerate()
        .map(|(i, v)| VariableSpec::new(i as u16, v.name, v.values))
        .collect();
    validate_variables(&specs)?;
    Ok(specs)
}

pub(crate) fn pa_to_map(pa: &PartialAssignment, vars: &[VariableSpec]) -> BTreeMap<String, String> {
    pa.entries()
        .iter()
        .map(|&(var, val)| {
            let spec = &vars[var as usize];
            (spec.name.clone(), spec.value_names[val as usize].clone())
        })
        .collect()
}

pub(crate) fn map_to_pa(
    map: &BTreeMap<String, String>,
    vars: &[VariableSpec],
) -> Result<PartialAssignment, FormatError> {
    let mut pa = PartialAssignment::new();
    for (name, value) in map {
        let spec = vars
            .iter()
            .find(|v| &v.name == name)
            .ok_or_else(|| FormatError::UnknownVariable { name: name.clone() })?;
        let val = spec.value_index(value).ok_or_else(|| FormatError::UnknownValue {
            var: name.clone(),
            value: value.clone(),
        })?;
        pa.set(spec.id, val);
    }
    Ok(pa)
}

pub(crate) fn state_to_map(s: &State, vars: &[VariableSpec]) -> BTreeMap<String, String> {
    pa_to_map(&s.to_partial(), vars)
}

/// A state map must assign every declared variable (totality).
pub(crate) fn map_to_state(
    map: &BTreeMap<String, String>,
    vars: &[VariableSpec],
    index: usize,
) -> Result<State, FormatError> {
    let pa = map_to_pa(map, vars)?;
    let mut values = Vec::with_capacity(vars.len());
    for spec in vars {
        match pa.get(spec.id) {
            Some(val) => values.push(val),
            None => {
                return Err(FormatError::PartialState { index, name: spec.name.clone() })
            }
        }
    }
    Ok(State::new(values, vars)?)
}

fn actions_to_file(model: &ActionModel) -> Vec<ActionFile> {
    // BTreeMap iteration gives the canonical name order.
    model
        .actions()
        .values()
        .map(|a| ActionFile {
            name: a.name().to_string(),
            pre: pa_to_map(a.pre(), model.variables()),
            eff: pa_to_map(a.eff(), model.variables()),
        })
        .collect()
}

fn actions_from_file(
    actions: Vec<ActionFile>,
    vars: &[VariableSpec],
) -> Result<Vec<Action>, FormatError> {
    actions
        .into_iter()
        .map(|a| Ok(Action::new(a.name, map_to_pa(&a.pre, vars)?, map_to_pa(&a.eff, vars)?)))
        .collect()
}

fn pretty(value: &impl Serialize) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    out.push('\n');
    out
}

/// Canonical JSON for an action model (also accepts variables-only files on
/// the way back in, for callers that only need the declarations).
pub fn serialize_domain(model: &ActionModel) -> String {
    pretty(&DomainFile {
        schema_version: SCHEMA_VERSION,
        variables: vars_to_file(model.variables()),
        actions: actions_to_file(model),
    })
}

pub fn parse_domain(text: &str) -> Result<ActionModel, FormatError> {
    let file: DomainFile = serde_json::from_str(text)?;
    check_version(file.schema_version)?;
    let vars = vars_from_file(file.variables)?;
    let actions = actions_from_file(file.actions, &vars)?;
    Ok(ActionModel::new(vars, actions)?)
}

/// A parsed problem file: the problem plus its optional provenance note.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedProblem {
    pub problem: Problem,
    pub provenance: Option<String>,
}

pub fn serialize_problem(problem: &Problem, provenance: Option<&str>) -> String {
    pretty(&ProblemFile {
        schema_version: SCHEMA_VERSION,
        domain: DomainBody {
            variables: vars_to_file(problem.model.variables()),
            actions: actions_to_file(&problem.model),
        },
        init: state_to_map(&problem.init, problem.model.variables()),
        goal: pa_to_map(&problem.goal, problem.model.variables()),
        provenance: provenance.map(str::to_string),
    })
}

pub fn parse_problem(text: &str) -> Result<ParsedProblem, FormatError> {
    let file: ProblemFile = serde_json::from_str(text)?;
    check_version(file.schema_version)?;
    let vars = vars_from_file(file.domain.variables)?;
    let actions = actions_from_file(file.domain.actions, &vars)?;
    let init = map_to_state(&file.init, &vars, 0)?;
    let goal = map_to_pa(&file.goal, &vars)?;
    let model = ActionModel::new(vars, actions)?;
    Ok(ParsedProblem { problem: Problem::new(model, init, goal)?, provenance: file.provenance })
}

pub fn serialize_learned(lm: &LearnedModel) -> String {
    pretty(&LearnedFile {
        schema_version: SCHEMA_VERSION,
        id: lm.id.clone(),
        trajectory_count: lm.trajectory_count,
        variables: vars_to_file(&lm.variables),
        actions: lm
            .actions
            .values()
            .map(|la| LearnedActionFile {
                name: la.name.clone(),
                pre_upper: pa_to_map(&la.pre_upper, &lm.variables),
                eff_lower: pa_to_map(&la.eff_lower, &lm.variables),
                observations: la.observations,
            })
            .collect(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    schema_version: u32,
    steps: Vec<String>,
}

pub fn serialize_plan(plan: &crate::sas::Plan) -> String {
    pretty(&PlanFile { schema_version: SCHEMA_VERSION, steps: plan.steps.clone() })
}

pub fn parse_plan(text: &str) -> Result<crate::sas::Plan, FormatError> {
    let file: PlanFile = serde_json::from_str(text)?;
    check_version(file.schema_version)?;
    Ok(crate::sas::Plan::new(file.steps))
}

pub fn parse_learned(text: &str) -> Result<LearnedModel, FormatError> {
    let file: LearnedFile = serde_json::from_str(text)?;
    check_version(file.schema_version)?;
    let vars = vars_from_file(file.variables)?;
    let mut actions = std::collections::BTreeMap::new();
    for a in file.actions {
        let pre_upper = map_to_pa(&a.pre_upper, &vars)?;
        let eff_lower = map_to_pa(&a.eff_lower, &vars)?;
        pre_upper.check_against(&vars)?;
        eff_lower.check_against(&vars)?;
        actions.insert(
            a.name.clone(),
            LearnedAction { name: a.name, pre_upper, eff_lower, observations: a.observations },
        );
    }
    Ok(LearnedModel {
        id: file.id,
        trajectory_count: file.trajectory_count,
        variables: vars,
        actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_logistics, LogisticsConfig};
    use crate::learner::learn_with_id;

    fn model() -> ActionModel {
        gen_logistics(&LogisticsConfig::new(3, 1, 1)).unwrap()
    }

    #[test]
    fn domain_serialization_is_canonical_and_idempotent() {
        let text = serialize_domain(&model());
        let once = serialize_domain(&parse_domain(&text).unwrap());
        let twice = serialize_domain(&parse_domain(&once).unwrap());
        assert_eq!(once, twice);
        assert_eq!(parse_domain(&text).unwrap(), model());
    }

    #[test]
    fn bundled_logistics_has_12_actions_2_variables() {
        let parsed = parse_domain(&serialize_domain(&model())).unwrap();
        assert_eq!(parsed.num_actions(), 12);
        assert_eq!(parsed.variables().len(), 2);
    }

    #[test]
    fn empty_action_list_is_a_valid_model() {
        let text = r#"{
  "schema_version": 1,
  "variables": [{"name": "x", "values": ["a", "b"]}]
}"#;
        let parsed = parse_domain(text).unwrap();
        assert_eq!(parsed.num_actions(), 0);
    }

    #[test]
    fn dangling_value_name_is_a_semantic_error() {
        let text = r#"{
  "schema_version": 1,
  "variables": [{"name": "x", "values": ["a", "b"]}],
  "actions": [{"name": "go", "pre": {"x": "z"}, "eff": {"x": "b"}}]
}"#;
        match parse_domain(text).unwrap_err() {
            FormatError::UnknownValue { var, value } => {
                assert_eq!(var, "x");
                assert_eq!(value, "z");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn schema_violations_are_parse_errors() {
        assert!(parse_domain("{").is_err());
        assert!(parse_domain(r#"{"schema_version": 99, "variables": []}"#).is_err());
        // Duplicate variable names violate a model invariant.
        let dup = r#"{
  "schema_version": 1,
  "variables": [{"name": "x", "values": ["a"]}, {"name": "x", "values": ["a"]}]
}"#;
        assert!(parse_domain(dup).is_err());
    }

    #[test]
    fn problem_round_trip_keeps_provenance() {
        let m = model();
        let init = State::new(vec![0, 1], m.variables()).unwrap();
        let goal: PartialAssignment = [(1, 2)].into_iter().collect();
        let prob = Problem::new(m, init, goal).unwrap();
        let text = serialize_problem(&prob, Some("corpus-7 (m=3)"));
        let parsed = parse_problem(&text).unwrap();
        assert_eq!(parsed.problem, prob);
        assert_eq!(parsed.provenance.as_deref(), Some("corpus-7 (m=3)"));
        assert_eq!(serialize_problem(&parsed.problem, parsed.provenance.as_deref()), text);
    }

    #[test]
    fn non_total_init_is_rejected() {
        let m = model();
        let mut text = serialize_problem(
            &Problem::new(
                m.clone(),
                State::new(vec![0, 0], m.variables()).unwrap(),
                PartialAssignment::new(),
            )
            .unwrap(),
            None,
        );
        text = text.replace("\"PackageAt\": \"A\",\n    \"TruckAt\": \"A\"", "\"TruckAt\": \"A\"");
        assert!(matches!(parse_problem(&text), Err(FormatError::PartialState { .. })));
    }

    #[test]
    fn learned_model_round_trips() {
        let m = model();
        let s0 = State::new(vec![0, 1], m.variables()).unwrap();
        let s1 = State::new(vec![1, 1], m.variables()).unwrap();
        let traj = crate::sas::Trajectory::new(
            "t0",
            vec![s0, s1],
            vec!["Move_A_B".to_string()],
            None,
        )
        .unwrap();
        let lm = learn_with_id("corpus", &[traj], m.variables()).unwrap();
        let text = serialize_learned(&lm);
        let parsed = parse_learned(&text).unwrap();
        assert_eq!(parsed, lm);
        assert_eq!(serialize_learned(&parsed), text);
    }
}
