//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use rand::Rng;

use safeplan::bench::{gen_logistics, sample_instance, DistConfig, LogisticsConfig};
use safeplan::rng::{stream, Stream};
use safeplan::sas::{Action, ActionModel, PartialAssignment, State, Trajectory, Val};

/// One-way chain domain: `pos` can only count upward, so uniformly drawn
/// goals are frequently unreachable. Used to exercise unsolvable-draw
/// handling, which full logistics (strongly connected) never triggers.
pub fn chain(n: usize) -> ActionModel {
    let vars = vec![safeplan::sas::VariableSpec::new(
        0,
        "pos",
        (0..n).map(|i| i.to_string()).collect(),
    )];
    let actions = (0..n - 1)
        .map(|i| {
            Action::new(
                format!("inc_{i}"),
                [(0, i as Val)].into_iter().collect(),
                [(0, (i + 1) as Val)].into_iter().collect(),
            )
        })
        .collect();
    ActionModel::new(vars, actions).unwrap()
}

/// Draws a solvable-only training corpus of size `m`.
pub fn sample_corpus(
    truth: &ActionModel,
    cfg: &DistConfig,
    seed: u64,
    m: usize,
) -> Vec<Trajectory> {
    (0..m)
        .map(|i| {
            let mut rng = stream(seed, &[i as u64]);
            let cfg = DistConfig { solvable_only: true, ..*cfg };
            let mut traj = sample_instance(truth, &cfg, &mut rng)
                .expect("sampling a solvable instance")
                .instance
                .trajectory
                .expect("solvable draws carry trajectories");
            traj.id = format!("t{i}");
            traj
        })
        .collect()
}

/// A random desk-scale logistics shape: 2-5 locations, 1-2 trucks and
/// packages.
pub fn random_logistics(rng: &mut Stream) -> (LogisticsConfig, ActionModel) {
    let cfg = LogisticsConfig::new(
        rng.gen_range(2..=5),
        rng.gen_range(1..=2),
        rng.gen_range(1..=2),
    );
    let model = gen_logistics(&cfg).expect("valid config");
    (cfg, model)
}

pub fn state_by_names(model: &ActionModel, pairs: &[(&str, &str)]) -> State {
    let vars = model.variables();
    let mut values = vec![0; vars.len()];
    for (name, value) in pairs {
        let spec = model.variable_by_name(name).unwrap();
        values[spec.id as usize] = spec.value_index(value).unwrap();
    }
    State::new(values, vars).unwrap()
}

pub fn goal_by_names(model: &ActionModel, pairs: &[(&str, &str)]) -> PartialAssignment {
    pairs
        .iter()
        .map(|(name, value)| {
            let spec = model.variable_by_name(name).unwrap();
            (spec.id, spec.value_index(value).unwrap())
        })
        .collect()
}

/// The drive-pickup-drive-unload trajectory from the 3-location domain.
pub fn delivery_t1(model: &ActionModel) -> Trajectory {
    Trajectory::new(
        "T1",
        vec![
            state_by_names(model, &[("TruckAt", "A"), ("PackageAt", "B")]),
            state_by_names(model, &[("TruckAt", "B"), ("PackageAt", "B")]),
            state_by_names(model, &[("TruckAt", "B"), ("PackageAt", "T")]),
            state_by_names(model, &[("TruckAt", "C"), ("PackageAt", "T")]),
            state_by_names(model, &[("TruckAt", "C"), ("PackageAt", "C")]),
        ],
        ["Move_A_B", "Pickup_B", "Move_B_C", "Unload_C"].map(String::from).to_vec(),
        Some(goal_by_names(model, &[("PackageAt", "C")])),
    )
    .unwrap()
}
