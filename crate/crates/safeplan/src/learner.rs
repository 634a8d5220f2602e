//! Conservative action-model learning from successfully executed trajectories.
//!
//! Each trajectory is partitioned into `(pre-state, action, post-state)`
//! triplets. Per observed action, the learned precondition is the upper
//! bound — the intersection of all pre-states — and the learned effect is
//! the lower bound — the union of observed value changes. Planning with
//! these bounds can never apply an action outside its true precondition,
//! which is the safety guarantee the rest of the crate is built on.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::sas::{
    Action, ActionModel, PartialAssignment, SasError, State, Trajectory, VarId, VariableSpec,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LearnError {
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error(
        "action `{action}` demands conflicting effect values for variable {var} \
         ({first} vs {second}); the corpus is not consistent with any deterministic model"
    )]
    ConflictingEffect { action: String, var: usize, first: usize, second: usize },
}

/// One observed application of an action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTriplet {
    pub pre_state: State,
    pub action_name: String,
    pub post_state: State,
}

/// The learned bounds for one action, plus how often it was observed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedAction {
    pub name: String,
    /// Intersection of all observed pre-states.
    pub pre_upper: PartialAssignment,
    /// Union of all observed value changes.
    pub eff_lower: PartialAssignment,
    pub observations: u64,
}

/// A learned model: exactly the actions seen in some trajectory.
///
/// `id` and `trajectory_count` are provenance so compiled problems and
/// experiment results can be tied back to the corpus they came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedModel {
    pub id: String,
    pub trajectory_count: u64,
    pub variables: Vec<VariableSpec>,
    pub actions: BTreeMap<String, LearnedAction>,
}

impl LearnedModel {
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }
}

/// Splits trajectories into per-action triplets, preserving multiplicity.
/// A trajectory with n actions yields exactly n triplets.
pub fn extract_triplets(trajs: &[Trajectory]) -> BTreeMap<String, Vec<ActionTriplet>> {
    let mut map: BTreeMap<String, Vec<ActionTriplet>> = BTreeMap::new();
    for traj in trajs {
        for (i, name) in traj.actions.iter().enumerate() {
            map.entry(name.clone()).or_default().push(ActionTriplet {
                pre_state: traj.states[i].clone(),
                action_name: name.clone(),
                post_state: traj.states[i + 1].clone(),
            });
        }
    }
    map
}

/// Learns the conservative bounds from a corpus. Output is independent of
/// trajectory order: intersections and unions commute.
pub fn learn(trajs: &[Trajectory], vars: &[VariableSpec]) -> Result<LearnedModel, LearnError> {
    learn_with_id("learned", trajs, vars)
}

/// As [`learn`], tagging the result with a caller-chosen provenance id.
pub fn learn_with_id(
    id: impl Into<String>,
    trajs: &[Trajectory],
    vars: &[VariableSpec],
) -> Result<LearnedModel, LearnError> {
    for traj in trajs {
        traj.check_against(vars)?;
    }
    let mut actions = BTreeMap::new();
    for (name, triplets) in extract_triplets(trajs) {
        actions.insert(name.clone(), learn_action(name, &triplets, vars)?);
    }
    Ok(LearnedModel {
        id: id.into(),
        trajectory_count: trajs.len() as u64,
        variables: vars.to_vec(),
        actions,
    })
}

fn learn_action(
    name: String,
    triplets: &[ActionTriplet],
    vars: &[VariableSpec],
) -> Result<LearnedAction, LearnError> {
    debug_assert!(!triplets.is_empty());
    let num_vars = vars.len();

    // pre_upper: a variable survives only while every pre-state agrees on it.
    let mut pre_upper: Vec<Option<u16>> =
        triplets[0].pre_state.values().iter().map(|&v| Some(v)).collect();
    for t in &triplets[1..] {
        for (slot, &v) in pre_upper.iter_mut().zip(t.pre_state.values()) {
            if *slot != Some(v) {
                *slot = None;
            }
        }
    }

    // eff_lower: any observed change pins the effect value for that variable.
    let mut eff_lower: Vec<Option<u16>> = vec![None; num_vars];
    for t in triplets {
        for (var, slot) in eff_lower.iter_mut().enumerate() {
            let before = t.pre_state.values()[var];
            let after = t.post_state.values()[var];
            if before != after {
                match *slot {
                    None => *slot = Some(after),
                    Some(prev) if prev == after => {}
                    Some(prev) => {
                        return Err(LearnError::ConflictingEffect {
                            action: name,
                            var,
                            first: prev as usize,
                            second: after as usize,
                        })
                    }
                }
            }
        }
    }

    let collect = |slots: Vec<Option<u16>>| -> PartialAssignment {
        slots
            .into_iter()
            .enumerate()
            .filter_map(|(var, val)| val.map(|v| (var as VarId, v)))
            .collect()
    };
    Ok(LearnedAction {
        name,
        pre_upper: collect(pre_upper),
        eff_lower: collect(eff_lower),
        observations: triplets.len() as u64,
    })
}

/// Converts learned bounds into a plain action model: pre = upper bound,
/// eff = lower bound, normalized by `Action` construction.
pub fn learned_to_model(lm: &LearnedModel) -> Result<ActionModel, SasError> {
    let actions = lm
        .actions
        .values()
        .map(|la| Action::new(la.name.clone(), la.pre_upper.clone(), la.eff_lower.clone()))
        .collect();
    ActionModel::new(lm.variables.clone(), actions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_logistics, LogisticsConfig};
    use crate::sas::{self, Plan, Problem};

    fn model() -> ActionModel {
        gen_logistics(&LogisticsConfig::new(3, 1, 1)).unwrap()
    }

    fn st(model: &ActionModel, truck: &str, pkg: &str) -> State {
        let t = model.variable_by_name("TruckAt").unwrap();
        let p = model.variable_by_name("PackageAt").unwrap();
        let mut values = vec![0; 2];
        values[t.id as usize] = t.value_index(truck).unwrap();
        values[p.id as usize] = p.value_index(pkg).unwrap();
        State::new(values, model.variables()).unwrap()
    }

    /// A delivery trace: drive A to B, pick up, drive B to C, unload.
    fn t1(model: &ActionModel) -> Trajectory {
        Trajectory::new(
            "T1",
            vec![
                st(model, "A", "B"),
                st(model, "B", "B"),
                st(model, "B", "T"),
                st(model, "C", "T"),
                st(model, "C", "C"),
            ],
            ["Move_A_B", "Pickup_B", "Move_B_C", "Unload_C"].map(String::from).to_vec(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn length_zero_trajectory_yields_empty_map() {
        let m = model();
        let t = Trajectory::new("t", vec![st(&m, "A", "A")], vec![], None).unwrap();
        assert!(extract_triplets(&[t]).is_empty());
    }

    #[test]
    fn t1_yields_four_triplets_and_multiplicity_is_kept() {
        let m = model();
        let triplets = extract_triplets(&[t1(&m)]);
        assert_eq!(triplets.len(), 4);
        for name in ["Move_A_B", "Pickup_B", "Move_B_C", "Unload_C"] {
            assert_eq!(triplets[name].len(), 1);
        }
        let twice = extract_triplets(&[t1(&m), t1(&m)]);
        for v in twice.values() {
            assert_eq!(v.len(), 2);
            assert_eq!(v[0], v[1]);
        }
    }

    #[test]
    fn self_loop_triplet_learns_full_pre_and_empty_eff() {
        let m = model();
        let s = st(&m, "A", "A");
        let t =
            Trajectory::new("t", vec![s.clone(), s.clone()], vec!["spin".into()], None).unwrap();
        let lm = learn(&[t], m.variables()).unwrap();
        let la = &lm.actions["spin"];
        assert_eq!(la.pre_upper, s.to_partial());
        assert!(la.eff_lower.is_empty());
        assert_eq!(la.observations, 1);
    }

    #[test]
    fn t1_alone_learns_the_over_restrictive_move() {
        let m = model();
        let lm = learn(&[t1(&m)], m.variables()).unwrap();
        assert_eq!(lm.num_actions(), 4);
        let mv = &lm.actions["Move_A_B"];
        // Both variables were constant across the (single) pre-state, so the
        // package position lands in the precondition bound.
        assert_eq!(mv.pre_upper, st(&m, "A", "B").to_partial());
        let t = m.variable_by_name("TruckAt").unwrap();
        let expected_eff: PartialAssignment =
            [(t.id, t.value_index("B").unwrap())].into_iter().collect();
        assert_eq!(mv.eff_lower, expected_eff);
    }

    #[test]
    fn second_trajectory_shrinks_the_precondition() {
        let m = model();
        let t2 = Trajectory::new(
            "T2",
            vec![st(&m, "A", "A"), st(&m, "B", "A")],
            vec!["Move_A_B".into()],
            None,
        )
        .unwrap();
        let lm = learn(&[t1(&m), t2], m.variables()).unwrap();
        let mv = &lm.actions["Move_A_B"];
        let t = m.variable_by_name("TruckAt").unwrap();
        let expected: PartialAssignment =
            [(t.id, t.value_index("A").unwrap())].into_iter().collect();
        assert_eq!(mv.pre_upper, expected);
        assert_eq!(mv.observations, 2);
    }

    #[test]
    fn conflicting_effects_are_rejected() {
        let m = model();
        let bad = vec![
            Trajectory::new(
                "a",
                vec![st(&m, "A", "A"), st(&m, "B", "A")],
                vec!["warp".into()],
                None,
            )
            .unwrap(),
            Trajectory::new(
                "b",
                vec![st(&m, "A", "A"), st(&m, "C", "A")],
                vec!["warp".into()],
                None,
            )
            .unwrap(),
        ];
        assert!(matches!(
            learn(&bad, m.variables()).unwrap_err(),
            LearnError::ConflictingEffect { .. }
        ));
    }

    #[test]
    fn empty_corpus_learns_empty_model() {
        let m = model();
        let lm = learn(&[], m.variables()).unwrap();
        assert_eq!(lm.num_actions(), 0);
        let compiled = learned_to_model(&lm).unwrap();
        assert_eq!(compiled.num_actions(), 0);
    }

    #[test]
    fn learned_to_model_round_trips_t1_and_replays() {
        let m = model();
        let traj = t1(&m);
        let lm = learn(std::slice::from_ref(&traj), m.variables()).unwrap();
        let compiled = learned_to_model(&lm).unwrap();
        let mv = compiled.action("Move_A_B").unwrap();
        assert_eq!(*mv.pre(), st(&m, "A", "B").to_partial());

        // Replay guarantee: the trajectory validates as a plan under its own
        // learned model, reproducing the recorded state sequence.
        let prob = Problem::new(
            compiled,
            traj.first_state().clone(),
            traj.last_state().to_partial(),
        )
        .unwrap();
        let report =
            sas::validate_plan(&Plan::new(traj.actions.clone()), &prob).unwrap();
        assert!(report.success);
        assert_eq!(report.states, traj.states);
    }
}
