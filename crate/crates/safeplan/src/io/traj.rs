//! JSON-Lines trajectory corpora: one trajectory per line, states as
//! name-to-value maps, so large corpora stream without loading whole files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::json::{map_to_pa, map_to_state, pa_to_map, state_to_map};
use super::FormatError;
use crate::sas::{self, ActionModel, Trajectory, VariableSpec};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajLine {
    id: String,
    states: Vec<BTreeMap<String, String>>,
    actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goal: Option<BTreeMap<String, String>>,
}

/// One compact JSON object per trajectory, newline-terminated.
pub fn serialize_trajectories(trajs: &[Trajectory], vars: &[VariableSpec]) -> String {
    let mut out = String::new();
    for traj in trajs {
        let line = TrajLine {
            id: traj.id.clone(),
            states: traj.states.iter().map(|s| state_to_map(s, vars)).collect(),
            actions: traj.actions.clone(),
            goal: traj.goal.as_ref().map(|g| pa_to_map(g, vars)),
        };
        out.push_str(&serde_json::to_string(&line).expect("serialization cannot fail"));
        out.push('\n');
    }
    out
}

/// Parses a corpus against the given variables. Validates alternation and
/// state totality always; when `reference` is supplied, additionally checks
/// every step against its execution semantics (the recorded post-state must
/// equal `apply(pre-state, action)`).
pub fn parse_trajectories(
    text: &str,
    vars: &[VariableSpec],
    reference: Option<&ActionModel>,
) -> Result<Vec<Trajectory>, FormatError> {
    let mut trajs = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TrajLine = serde_json::from_str(line)
            .map_err(|source| FormatError::JsonLine { line: line_idx + 1, source })?;
        let states = parsed
            .states
            .iter()
            .enumerate()
            .map(|(i, m)| map_to_state(m, vars, i))
            .collect::<Result<Vec<_>, _>>()?;
        let goal = parsed.goal.as_ref().map(|g| map_to_pa(g, vars)).transpose()?;
        let traj = Trajectory::new(parsed.id, states, parsed.actions, goal)?;
        if let Some(model) = reference {
            check_consistency(&traj, model)?;
        }
        trajs.push(traj);
    }
    Ok(trajs)
}

fn check_consistency(traj: &Trajectory, model: &ActionModel) -> Result<(), FormatError> {
    for (step, name) in traj.actions.iter().enumerate() {
        let action = model.action(name).ok_or_else(|| FormatError::UnknownReferenceAction {
            id: traj.id.clone(),
            step,
            action: name.clone(),
        })?;
        let pre = &traj.states[step];
        if !sas::is_applicable(pre, action)? {
            return Err(FormatError::InapplicableStep {
                id: traj.id.clone(),
                step,
                action: name.clone(),
            });
        }
        if sas::apply(pre, action)? != traj.states[step + 1] {
            return Err(FormatError::InconsistentStep { id: traj.id.clone(), step });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_logistics, LogisticsConfig};
    use crate::sas::State;

    fn fixture() -> (ActionModel, Trajectory) {
        let model = gen_logistics(&LogisticsConfig::new(3, 1, 1)).unwrap();
        let t = model.variable_by_name("TruckAt").unwrap();
        let p = model.variable_by_name("PackageAt").unwrap();
        let mk = |truck: &str, pkg: &str| {
            let mut values = vec![0; 2];
            values[t.id as usize] = t.value_index(truck).unwrap();
            values[p.id as usize] = p.value_index(pkg).unwrap();
            State::new(values, model.variables()).unwrap()
        };
        let traj = Trajectory::new(
            "T1",
            vec![mk("A", "B"), mk("B", "B"), mk("B", "T"), mk("C", "T"), mk("C", "C")],
            ["Move_A_B", "Pickup_B", "Move_B_C", "Unload_C"].map(String::from).to_vec(),
            None,
        )
        .unwrap();
        (model, traj)
    }

    #[test]
    fn corpus_round_trips_and_checks_against_the_reference() {
        let (model, traj) = fixture();
        let text = serialize_trajectories(std::slice::from_ref(&traj), model.variables());
        assert_eq!(text.lines().count(), 1);
        let parsed = parse_trajectories(&text, model.variables(), Some(&model)).unwrap();
        assert_eq!(parsed, vec![traj]);
        assert_eq!(serialize_trajectories(&parsed, model.variables()), text);
    }

    #[test]
    fn single_state_record_is_a_length_zero_trajectory() {
        let (model, _) = fixture();
        let text = r#"{"id":"t","states":[{"TruckAt":"A","PackageAt":"B"}],"actions":[]}"#;
        let parsed = parse_trajectories(text, model.variables(), Some(&model)).unwrap();
        assert_eq!(parsed.len(), 1);
        assert!(parsed[0].is_empty());
    }

    #[test]
    fn corrupted_final_state_is_a_consistency_error_at_step_3() {
        let (model, mut traj) = fixture();
        let p = model.variable_by_name("PackageAt").unwrap();
        let mut values = traj.states[4].values().to_vec();
        values[p.id as usize] = p.value_index("T").unwrap();
        traj.states[4] = State::from_vec(values);
        let text = serialize_trajectories(&[traj], model.variables());
        match parse_trajectories(&text, model.variables(), Some(&model)).unwrap_err() {
            FormatError::InconsistentStep { id, step } => {
                assert_eq!(id, "T1");
                assert_eq!(step, 3);
            }
            other => panic!("unexpected error {other}"),
        }
        // Without a reference model the record is structurally fine.
    }

    #[test]
    fn alternation_violation_is_rejected() {
        let (model, _) = fixture();
        let text = r#"{"id":"t","states":[{"TruckAt":"A","PackageAt":"B"}],"actions":["Move_A_B"]}"#;
        assert!(parse_trajectories(text, model.variables(), None).is_err());
    }

    #[test]
    fn bad_lines_carry_their_line_number() {
        let (model, traj) = fixture();
        let mut text = serialize_trajectories(&[traj], model.variables());
        text.push_str("{not json\n");
        match parse_trajectories(&text, model.variables(), None).unwrap_err() {
            FormatError::JsonLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }
}
