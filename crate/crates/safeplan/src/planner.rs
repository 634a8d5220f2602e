//! Complete, optimal, deterministic search over SAS+ problems.
//!
//! `solve` is A* under an admissible, consistent heuristic (unsatisfied goal
//! count divided by the largest effect size, ceilinged): every returned plan
//! is optimal in step count, and `no_plan` is only reported after the whole
//! reachable space is exhausted. `solve_bfs` is a plain breadth-first
//! search kept as an independent cross-check oracle.
//!
//! Tie-breaking is fixed — lower f, then lower h, then lexicographically
//! smaller state, with successors generated in action-name order — so equal
//! inputs always produce identical results.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::sas::{self, Action, ActionModel, Plan, Problem, SasError, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlannerError {
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error("reachable-state enumeration exceeded the cap of {cap} states")]
    ReachabilityCapExceeded { cap: usize },
}

/// Resource bounds for a single search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_generated: u64,
    pub max_time: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_generated: 10_000_000, max_time: Duration::from_secs(60) }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits { max_generated: u64::MAX, max_time: Duration::from_secs(u64::MAX / 4) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: u64,
    pub generated: u64,
    pub peak_frontier: usize,
    pub wall_time: Duration,
}

/// The planner verdict. A resource limit is reported as its own outcome,
/// never conflated with unsolvability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Plan(Plan),
    NoPlan,
    ResourceLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

struct NodeRec {
    state: State,
    parent: Option<(u32, u32)>, // (node index, action index)
    g: u32,
}

fn ordered_actions(model: &ActionModel) -> Vec<(&str, &Action)> {
    model.actions().iter().map(|(name, a)| (name.as_str(), a)).collect()
}

fn unsatisfied_goals(s: &State, prob: &Problem) -> u32 {
    prob.goal.entries().iter().filter(|&&(var, val)| s.get(var) != Some(val)).count() as u32
}

fn reconstruct(nodes: &[NodeRec], actions: &[(&str, &Action)], mut idx: u32) -> Plan {
    let mut steps = Vec::new();
    while let Some((parent, action_idx)) = nodes[idx as usize].parent {
        steps.push(actions[action_idx as usize].0.to_string());
        idx = parent;
    }
    steps.reverse();
    Plan::new(steps)
}

/// Optimal A* search. Plans are optimal in step count; `NoPlan` means the
/// goal is unreachable from the initial state.
pub fn solve(prob: &Problem, limits: &Limits) -> Result<SearchResult, SasError> {
    let start = Instant::now();
    let actions = ordered_actions(&prob.model);
    let max_eff = prob.model.max_effect_size() as u32;
    let h = |s: &State| {
        let unsat = unsatisfied_goals(s, prob);
        unsat.div_ceil(max_eff)
    };

    let mut nodes: Vec<NodeRec> = Vec::new();
    let mut best_g: HashMap<State, u32> = HashMap::new();
    // Reverse-ordered by (f, h, state, insertion id) per the tie-break rule.
    let mut frontier: BinaryHeap<Reverse<(u32, u32, State, u32)>> = BinaryHeap::new();
    let mut stats = SearchStats::default();

    let h0 = h(&prob.init);
    nodes.push(NodeRec { state: prob.init.clone(), parent: None, g: 0 });
    best_g.insert(prob.init.clone(), 0);
    frontier.push(Reverse((h0, h0, prob.init.clone(), 0)));
    stats.generated = 1;
    stats.peak_frontier = 1;

    while let Some(Reverse((_f, _h, state, node_idx))) = frontier.pop() {
        let g = nodes[node_idx as usize].g;
        if best_g.get(&state) != Some(&g) {
            continue; // stale entry: a cheaper path was already found
        }
        stats.expanded += 1;
        if stats.expanded % 256 == 0 && start.elapsed() > limits.max_time {
            stats.wall_time = start.elapsed();
            return Ok(SearchResult { outcome: Outcome::ResourceLimit, stats });
        }
        if sas::satisfies_goal(&state, &prob.goal)? {
            let plan = reconstruct(&nodes, &actions, node_idx);
            stats.wall_time = start.elapsed();
            return Ok(SearchResult { outcome: Outcome::Plan(plan), stats });
        }
        for (action_idx, (_, action)) in actions.iter().enumerate() {
            if !sas::is_applicable(&state, action)? {
                continue;
            }
            let succ = sas::apply(&state, action)?;
            let g2 = g + 1;
            let better = match best_g.get(&succ) {
                Some(&old) => g2 < old,
                None => true,
            };
            if !better {
                continue;
            }
            best_g.insert(succ.clone(), g2);
            let hs = h(&succ);
            let succ_idx = nodes.len() as u32;
            nodes.push(NodeRec {
                state: succ.clone(),
                parent: Some((node_idx, action_idx as u32)),
                g: g2,
            });
            stats.generated += 1;
            if stats.generated >= limits.max_generated {
                stats.wall_time = start.elapsed();
                return Ok(SearchResult { outcome: Outcome::ResourceLimit, stats });
            }
            frontier.push(Reverse((g2 + hs, hs, succ, succ_idx)));
            stats.peak_frontier = stats.peak_frontier.max(frontier.len());
        }
    }
    stats.wall_time = start.elapsed();
    Ok(SearchResult { outcome: Outcome::NoPlan, stats })
}

/// Plain breadth-first search with duplicate detection. Same contract as
/// [`solve`]; kept as an independent oracle for cross-checking.
pub fn solve_bfs(prob: &Problem, limits: &Limits) -> Result<SearchResult, SasError> {
    let start = Instant::now();
    let actions = ordered_actions(&prob.model);

    let mut nodes: Vec<NodeRec> = Vec::new();
    let mut seen: HashSet<State> = HashSet::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut stats = SearchStats::default();

    nodes.push(NodeRec { state: prob.init.clone(), parent: None, g: 0 });
    seen.insert(prob.init.clone());
    queue.push_back(0);
    stats.generated = 1;
    stats.peak_frontier = 1;

    while let Some(node_idx) = queue.pop_front() {
        stats.expanded += 1;
        if stats.expanded % 256 == 0 && start.elapsed() > limits.max_time {
            stats.wall_time = start.elapsed();
            return Ok(SearchResult { outcome: Outcome::ResourceLimit, stats });
        }
        let state = nodes[node_idx as usize].state.clone();
        if sas::satisfies_goal(&state, &prob.goal)? {
            let plan = reconstruct(&nodes, &actions, node_idx);
            stats.wall_time = start.elapsed();
            return Ok(SearchResult { outcome: Outcome::Plan(plan), stats });
        }
        for (action_idx, (_, action)) in actions.iter().enumerate() {
            if !sas::is_applicable(&state, action)? {
                continue;
            }
            let succ = sas::apply(&state, action)?;
            if !seen.insert(succ.clone()) {
                continue;
            }
            let succ_idx = nodes.len() as u32;
            nodes.push(NodeRec {
                state: succ,
                parent: Some((node_idx, action_idx as u32)),
                g: nodes[node_idx as usize].g + 1,
            });
            stats.generated += 1;
            if stats.generated >= limits.max_generated {
                stats.wall_time = start.elapsed();
                return Ok(SearchResult { outcome: Outcome::ResourceLimit, stats });
            }
            queue.push_back(succ_idx);
            stats.peak_frontier = stats.peak_frontier.max(queue.len());
        }
    }
    stats.wall_time = start.elapsed();
    Ok(SearchResult { outcome: Outcome::NoPlan, stats })
}

/// Every state reachable from `init` under `model`, in breadth-first order.
/// Errors once more than `cap` states are found.
pub fn reachable_states(
    model: &ActionModel,
    init: &State,
    cap: usize,
) -> Result<Vec<State>, PlannerError> {
    let actions = ordered_actions(model);
    let mut seen: HashSet<State> = HashSet::new();
    let mut order: Vec<State> = Vec::new();
    let mut queue: VecDeque<State> = VecDeque::new();
    seen.insert(init.clone());
    order.push(init.clone());
    queue.push_back(init.clone());
    while let Some(state) = queue.pop_front() {
        for (_, action) in &actions {
            if !sas::is_applicable(&state, action)? {
                continue;
            }
            let succ = sas::apply(&state, action)?;
            if seen.insert(succ.clone()) {
                if order.len() >= cap {
                    return Err(PlannerError::ReachabilityCapExceeded { cap });
                }
                order.push(succ.clone());
                queue.push_back(succ);
            }
        }
    }
    Ok(order)
}
