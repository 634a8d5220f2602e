//! Ground-truth domain generation and instance/trajectory sampling.
//!
//! The logistics generator reproduces the classic truck-and-package domain:
//! `Move` between any two locations, `Pickup` and `Unload` at a location.
//! The sampler draws `(init, goal, trajectory)` triples: init uniform over
//! all total states, goal projected from a uniformly chosen state reachable
//! from init, and the trajectory produced by the in-repo planner (optionally
//! with randomized tie-breaking, or a random walk completed by the planner,
//! to vary trajectory diversity).

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use thiserror::Error;

use crate::planner::{self, Limits, Outcome, PlannerError};
use crate::sas::{
    self, Action, ActionModel, PartialAssignment, Problem, SasError, State, Trajectory, Val,
    VarId, VariableSpec,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid logistics config: {reason}")]
    InvalidConfig { reason: String },
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("gave up sampling a solvable instance after {rejections} unsolvable draws")]
    RejectionLimit { rejections: u32 },
    #[error("planner hit a resource limit while producing a trajectory")]
    TrajectoryResourceLimit,
}

/// Shape of a generated logistics domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogisticsConfig {
    pub num_locations: usize,
    pub num_trucks: usize,
    pub num_packages: usize,
    /// Master seed used by CLI-driven sampling over this domain; the model
    /// built by [`gen_logistics`] does not depend on it.
    pub seed: u64,
}

impl LogisticsConfig {
    pub fn new(num_locations: usize, num_trucks: usize, num_packages: usize) -> Self {
        LogisticsConfig { num_locations, num_trucks, num_packages, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn location_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("L{i}")
    }
}

/// Builds the ground-truth logistics model. Deterministic given the config.
///
/// With one truck and one package the classic names are used (`TruckAt`,
/// `PackageAt`, on-truck value `T`, `Move_A_B`, `Pickup_A`, `Unload_A`);
/// larger configs add `_t<k>` / `_p<j>` suffixes.
pub fn gen_logistics(cfg: &LogisticsConfig) -> Result<ActionModel, BenchError> {
    if cfg.num_locations < 2 {
        return Err(BenchError::InvalidConfig { reason: "need at least 2 locations".into() });
    }
    if cfg.num_trucks < 1 || cfg.num_packages < 1 {
        return Err(BenchError::InvalidConfig {
            reason: "need at least 1 truck and 1 package".into(),
        });
    }

    let locations: Vec<String> = (0..cfg.num_locations).map(location_name).collect();
    let truck_sfx = |k: usize| if cfg.num_trucks == 1 { String::new() } else { format!("_t{k}") };
    let pkg_sfx = |j: usize| if cfg.num_packages == 1 { String::new() } else { format!("_p{j}") };
    let on_truck_value =
        |k: usize| if cfg.num_trucks == 1 { "T".to_string() } else { format!("T_t{k}") };

    let mut variables = Vec::new();
    for k in 0..cfg.num_trucks {
        variables.push(VariableSpec::new(
            variables.len() as VarId,
            format!("TruckAt{}", truck_sfx(k)),
            locations.clone(),
        ));
    }
    for j in 0..cfg.num_packages {
        let mut values = locations.clone();
        values.extend((0..cfg.num_trucks).map(on_truck_value));
        variables.push(VariableSpec::new(
            variables.len() as VarId,
            format!("PackageAt{}", pkg_sfx(j)),
            values,
        ));
    }

    let truck_var = |k: usize| k as VarId;
    let pkg_var = |j: usize| (cfg.num_trucks + j) as VarId;
    let on_truck_val = |k: usize| (cfg.num_locations + k) as Val;

    let mut actions = Vec::new();
    for k in 0..cfg.num_trucks {
        for (x, from) in locations.iter().enumerate() {
            for (y, to) in locations.iter().enumerate() {
                if x == y {
                    continue;
                }
                actions.push(Action::new(
                    format!("Move{}_{from}_{to}", truck_sfx(k)),
                    [(truck_var(k), x as Val)].into_iter().collect(),
                    [(truck_var(k), y as Val)].into_iter().collect(),
                ));
            }
        }
        for j in 0..cfg.num_packages {
            for (x, loc) in locations.iter().enumerate() {
                actions.push(Action::new(
                    format!("Pickup{}{}_{loc}", truck_sfx(k), pkg_sfx(j)),
                    [(truck_var(k), x as Val), (pkg_var(j), x as Val)].into_iter().collect(),
                    [(pkg_var(j), on_truck_val(k))].into_iter().collect(),
                ));
                actions.push(Action::new(
                    format!("Unload{}{}_{loc}", truck_sfx(k), pkg_sfx(j)),
                    [(truck_var(k), x as Val), (pkg_var(j), on_truck_val(k))]
                        .into_iter()
                        .collect(),
                    [(pkg_var(j), x as Val)].into_iter().collect(),
                ));
            }
        }
    }
    Ok(ActionModel::new(variables, actions)?)
}

/// How a sampled instance's trajectory is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryMode {
    /// Deterministic optimal plan from the in-repo planner.
    #[default]
    Optimal,
    /// Optimal plan with tie-breaking randomized over equally short steps.
    RandomizedOptimal,
    /// Bounded random walk, then planner completion to the goal.
    RandomWalk,
}

/// Where goal values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GoalMode {
    /// Project the selected variables from one state drawn uniformly from
    /// the set reachable from init. Such goals are always solvable.
    #[default]
    ReachableProjection,
    /// Draw each selected variable's value uniformly from its domain. The
    /// combination may be unreachable, so unsolvable draws occur and the
    /// rejection rate estimates 1 - mu.
    UniformValues,
}

/// Parameters of the sampling distribution over `(init, goal, trajectory)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistConfig {
    /// Per-variable probability of appearing in the goal (at least one
    /// variable is always selected).
    pub goal_density: f64,
    /// Reject-and-resample unsolvable draws instead of returning them.
    pub solvable_only: bool,
    pub mode: TrajectoryMode,
    pub goal_mode: GoalMode,
    /// Maximum unsolvable draws tolerated per accepted sample.
    pub max_rejections: u32,
    /// Cap on reachable-set enumeration per draw.
    pub reachability_cap: usize,
    /// Maximum random-walk length in [`TrajectoryMode::RandomWalk`].
    pub max_walk: usize,
}

impl Default for DistConfig {
    fn default() -> Self {
        DistConfig {
            goal_density: 0.5,
            solvable_only: true,
            mode: TrajectoryMode::Optimal,
            goal_mode: GoalMode::ReachableProjection,
            max_rejections: 10_000,
            reachability_cap: 200_000,
            max_walk: 10,
        }
    }
}

/// One draw from the distribution. `trajectory` is `None` exactly when the
/// draw was unsolvable and `solvable_only` was off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceTriple {
    pub init: State,
    pub goal: PartialAssignment,
    pub trajectory: Option<Trajectory>,
}

impl InstanceTriple {
    pub fn solvable(&self) -> bool {
        self.trajectory.is_some()
    }
}

/// A sample plus how many unsolvable draws were rejected to obtain it; the
/// rejection rate is the empirical estimate of `1 - mu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledInstance {
    pub instance: InstanceTriple,
    pub rejections: u32,
}

fn uniform_state(vars: &[VariableSpec], rng: &mut impl Rng) -> State {
    State::from_vec(
        vars.iter().map(|v| rng.gen_range(0..v.domain_size()) as Val).collect(),
    )
}

fn draw_goal(
    vars: &[VariableSpec],
    reachable: &[State],
    cfg: &DistConfig,
    rng: &mut impl Rng,
) -> PartialAssignment {
    let mut selected: Vec<VarId> = (0..vars.len() as VarId)
        .filter(|_| rng.gen_bool(cfg.goal_density))
        .collect();
    if selected.is_empty() {
        selected.push(rng.gen_range(0..vars.len()) as VarId);
    }
    match cfg.goal_mode {
        GoalMode::ReachableProjection => {
            let target = &reachable[rng.gen_range(0..reachable.len())];
            selected.into_iter().map(|var| (var, target.values()[var as usize])).collect()
        }
        GoalMode::UniformValues => selected
            .into_iter()
            .map(|var| (var, rng.gen_range(0..vars[var as usize].domain_size()) as Val))
            .collect(),
    }
}

/// Distance-to-goal over the explicit reachable graph, or `None` where the
/// goal cannot be reached. Used by randomized-optimal trajectory sampling.
fn goal_distances(
    model: &ActionModel,
    reachable: &[State],
    goal: &PartialAssignment,
) -> Result<HashMap<State, u32>, SasError> {
    let index: HashMap<&State, usize> =
        reachable.iter().enumerate().map(|(i, s)| (s, i)).collect();
    // Reverse adjacency: predecessors[j] lists states with an edge into j.
    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); reachable.len()];
    for (i, state) in reachable.iter().enumerate() {
        for action in model.actions().values() {
            if sas::is_applicable(state, action)? {
                let succ = sas::apply(state, action)?;
                if let Some(&j) = index.get(&succ) {
                    predecessors[j].push(i);
                }
            }
        }
    }
    let mut dist: Vec<Option<u32>> = vec![None; reachable.len()];
    let mut queue = std::collections::VecDeque::new();
    for (i, state) in reachable.iter().enumerate() {
        if sas::satisfies_goal(state, goal)? {
            dist[i] = Some(0);
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        let d = dist[j].expect("queued states have a distance");
        for &i in &predecessors[j] {
            if dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back(i);
            }
        }
    }
    Ok(reachable
        .iter()
        .zip(&dist)
        .filter_map(|(s, d)| d.map(|d| (s.clone(), d)))
        .collect())
}

fn trace_plan(
    truth: &ActionModel,
    init: &State,
    actions: &[String],
) -> Result<Vec<State>, SasError> {
    let mut states = vec![init.clone()];
    for name in actions {
        let action = truth
            .action(name)
            .ok_or_else(|| SasError::UnknownAction { action: name.clone() })?;
        let next = sas::apply(states.last().expect("nonempty"), action)?;
        states.push(next);
    }
    Ok(states)
}

fn optimal_plan(
    truth: &ActionModel,
    init: &State,
    goal: &PartialAssignment,
) -> Result<Option<Vec<String>>, BenchError> {
    let prob = Problem::new(truth.clone(), init.clone(), goal.clone())?;
    let result = planner::solve(&prob, &Limits::default())?;
    match result.outcome {
        Outcome::Plan(plan) => Ok(Some(plan.steps)),
        Outcome::NoPlan => Ok(None),
        Outcome::ResourceLimit => Err(BenchError::TrajectoryResourceLimit),
    }
}

fn randomized_optimal_plan(
    truth: &ActionModel,
    reachable: &[State],
    init: &State,
    goal: &PartialAssignment,
    rng: &mut impl Rng,
) -> Result<Option<Vec<String>>, BenchError> {
    let dist = goal_distances(truth, reachable, goal)?;
    let Some(&d0) = dist.get(init) else { return Ok(None) };
    let mut steps = Vec::with_capacity(d0 as usize);
    let mut state = init.clone();
    let mut remaining = d0;
    while remaining > 0 {
        let mut options: Vec<(&String, State)> = Vec::new();
        for (name, action) in truth.actions() {
            if sas::is_applicable(&state, action)? {
                let succ = sas::apply(&state, action)?;
                if dist.get(&succ) == Some(&(remaining - 1)) {
                    options.push((name, succ));
                }
            }
        }
        debug_assert!(!options.is_empty(), "a shorter path must exist from every on-path state");
        let (name, succ) = options.swap_remove(rng.gen_range(0..options.len()));
        steps.push(name.clone());
        state = succ;
        remaining -= 1;
    }
    Ok(Some(steps))
}

fn random_walk_plan(
    truth: &ActionModel,
    init: &State,
    goal: &PartialAssignment,
    max_walk: usize,
    rng: &mut impl Rng,
) -> Result<Option<Vec<String>>, BenchError> {
    // Decide solvability from init first so an unlucky walk cannot turn a
    // solvable draw into a rejection.
    let Some(from_init) = optimal_plan(truth, init, goal)? else { return Ok(None) };
    let walk_len = rng.gen_range(0..=max_walk);
    let mut steps: Vec<String> = Vec::new();
    let mut state = init.clone();
    for _ in 0..walk_len {
        let mut applicable: Vec<(&String, State)> = Vec::new();
        for (name, action) in truth.actions() {
            if sas::is_applicable(&state, action)? {
                applicable.push((name, sas::apply(&state, action)?));
            }
        }
        if applicable.is_empty() {
            break;
        }
        let (name, succ) = applicable.swap_remove(rng.gen_range(0..applicable.len()));
        steps.push(name.clone());
        state = succ;
    }
    match optimal_plan(truth, &state, goal)? {
        Some(completion) => {
            steps.extend(completion);
            Ok(Some(steps))
        }
        // The walk escaped the goal's basin; fall back to the direct plan.
        None => Ok(Some(from_init)),
    }
}

/// Draws one `(init, goal, trajectory)` triple. Deterministic given the
/// truth model, config, and stream state.
pub fn sample_instance(
    truth: &ActionModel,
    cfg: &DistConfig,
    rng: &mut impl Rng,
) -> Result<SampledInstance, BenchError> {
    let vars = truth.variables();
    let mut rejections = 0u32;
    loop {
        let init = uniform_state(vars, rng);
        let reachable = planner::reachable_states(truth, &init, cfg.reachability_cap)?;
        let goal = draw_goal(vars, &reachable, cfg, rng);
        let plan = match cfg.mode {
            TrajectoryMode::Optimal => optimal_plan(truth, &init, &goal)?,
            TrajectoryMode::RandomizedOptimal => {
                randomized_optimal_plan(truth, &reachable, &init, &goal, rng)?
            }
            TrajectoryMode::RandomWalk => {
                random_walk_plan(truth, &init, &goal, cfg.max_walk, rng)?
            }
        };
        match plan {
            Some(steps) => {
                let states = trace_plan(truth, &init, &steps)?;
                let trajectory =
                    Trajectory::new("sample", states, steps, Some(goal.clone()))?;
                return Ok(SampledInstance {
                    instance: InstanceTriple { init, goal, trajectory: Some(trajectory) },
                    rejections,
                });
            }
            None if cfg.solvable_only => {
                rejections += 1;
                if rejections >= cfg.max_rejections {
                    return Err(BenchError::RejectionLimit { rejections });
                }
            }
            None => {
                return Ok(SampledInstance {
                    instance: InstanceTriple { init, goal, trajectory: None },
                    rejections,
                })
            }
        }
    }
}

/// Fraction of sampled trajectories containing each truth action at least
/// once: the empirical view of which actions are frequent under the
/// distribution. Absent actions report 0.
pub fn estimate_action_frequencies(
    truth: &ActionModel,
    cfg: &DistConfig,
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<BTreeMap<String, f64>, BenchError> {
    assert!(n_samples >= 1, "need at least one sample");
    let solvable_cfg = DistConfig { solvable_only: true, ..*cfg };
    let mut counts: BTreeMap<String, u64> =
        truth.actions().keys().map(|name| (name.clone(), 0)).collect();
    for _ in 0..n_samples {
        let sample = sample_instance(truth, &solvable_cfg, rng)?;
        let traj = sample.instance.trajectory.expect("solvable_only sampling");
        let mut seen: Vec<&String> = traj.actions.iter().collect();
        seen.sort();
        seen.dedup();
        for name in seen {
            if let Some(c) = counts.get_mut(name) {
                *c += 1;
            }
        }
    }
    Ok(counts
        .into_iter()
        .map(|(name, c)| (name, c as f64 / n_samples as f64))
        .collect())
}
