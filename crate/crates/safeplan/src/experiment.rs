//! End-to-end statistical harness: sweep the training-corpus size, learn,
//! compile, plan on fresh draws from the same distribution, and record
//! per-run outcome rates. Everything is driven by one master seed through
//! derived streams, so a config reproduces its records byte-for-byte.

use rayon::prelude::*;
use thiserror::Error;

use crate::bench::{
    gen_logistics, sample_instance, BenchError, DistConfig, LogisticsConfig,
};
use crate::compiler::compile;
use crate::learner::{learn_with_id, LearnError};
use crate::pac::{sample_complexity, PacError, PacParams};
use crate::planner::{self, Limits, Outcome};
use crate::rng::stream;
use crate::sas::{self, Problem, SasError, Trajectory};

const TRAIN_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {reason}")]
    InvalidConfig { reason: String },
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error(transparent)]
    Pac(#[from] PacError),
}

/// What "solvable" means when scoring an evaluation draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuMode {
    /// Decide by running the exact planner on the true model.
    #[default]
    ExactSolvable,
    /// Trust the trajectory producer: solvable means it produced a
    /// trajectory. Bounds capability relative to that producer.
    PlannerRelative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: LogisticsConfig,
    pub dist: DistConfig,
    /// Training corpus sizes to sweep, ascending.
    pub m_values: Vec<u64>,
    pub eval_instances: u64,
    pub runs: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub master_seed: u64,
    pub mu_mode: MuMode,
    pub limits: Limits,
    /// Print one stderr line per finished (m, run) cell.
    pub progress: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.m_values.is_empty() {
            return Err(ExperimentError::InvalidConfig { reason: "m_values is empty".into() });
        }
        if self.m_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(ExperimentError::InvalidConfig {
                reason: "m_values must be ascending".into(),
            });
        }
        if self.eval_instances == 0 || self.runs == 0 {
            return Err(ExperimentError::InvalidConfig {
                reason: "need at least 1 run and 1 eval instance".into(),
            });
        }
        Ok(())
    }
}

/// One (m, run) cell of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub m: u64,
    pub run: u64,
    pub eval_instances: u64,
    /// Ground-truth-solvable evaluation draws.
    pub solvable: u64,
    /// Plans found by the conservative pipeline (all validated).
    pub solved: u64,
    /// Solvable draws the conservative planner reported unsolvable.
    pub unsolved_solvable: u64,
    pub resource_limited: u64,
    /// Plans that failed validation against the truth. Always zero; any
    /// other value means the safety argument is broken.
    pub unsafe_plans: u64,
    /// solved / solvable (resource-limited solvable draws excluded).
    pub solve_rate: f64,
    pub mean_plan_length: f64,
    /// Solvable draws over all draws including rejected ones.
    pub empirical_mu: f64,
    /// solved over all draws including rejected ones.
    pub p_plan_unconditional: f64,
    pub provenance: String,
    /// Not serialized: results files must be byte-stable across reruns.
    pub wall_time_ms: u64,
}

impl ExperimentRecord {
    /// Conditional failure rate on solvable draws.
    pub fn failure_rate(&self) -> f64 {
        if self.solvable == 0 {
            0.0
        } else {
            self.unsolved_solvable as f64 / self.solvable as f64
        }
    }
}

fn run_cell(
    truth: &sas::ActionModel,
    cfg: &ExperimentConfig,
    m: u64,
    run: u64,
) -> Result<ExperimentRecord, ExperimentError> {
    let started = std::time::Instant::now();
    let train_cfg = DistConfig { solvable_only: true, ..cfg.dist };
    let mut trajectories: Vec<Trajectory> = Vec::with_capacity(m as usize);
    for i in 0..m {
        let mut rng = stream(cfg.master_seed, &[TRAIN_STREAM, m, run, i]);
        let sampled = sample_instance(truth, &train_cfg, &mut rng)?;
        trajectories.push(sampled.instance.trajectory.expect("training draws are solvable"));
    }
    let lm = learn_with_id(format!("m{m}-run{run}"), &trajectories, truth.variables())?;

    let mut solvable = 0u64;
    let mut solved = 0u64;
    let mut unsolved_solvable = 0u64;
    let mut resource_limited = 0u64;
    let mut resource_limited_solvable = 0u64;
    let mut unsafe_plans = 0u64;
    let mut rejections = 0u64;
    let mut plan_len_total = 0u64;
    let mut provenance = String::new();

    for i in 0..cfg.eval_instances {
        let mut rng = stream(cfg.master_seed, &[EVAL_STREAM, m, run, i]);
        let sampled = sample_instance(truth, &cfg.dist, &mut rng)?;
        rejections += sampled.rejections as u64;
        let instance = sampled.instance;

        let is_solvable = match cfg.mu_mode {
            MuMode::PlannerRelative => instance.solvable(),
            MuMode::ExactSolvable => {
                if instance.solvable() {
                    true
                } else {
                    // Reconfirm with a direct search on the true model.
                    let prob = Problem::new(
                        truth.clone(),
                        instance.init.clone(),
                        instance.goal.clone(),
                    )?;
                    matches!(planner::solve(&prob, &cfg.limits)?.outcome, Outcome::Plan(_))
                }
            }
        };
        solvable += u64::from(is_solvable);

        let compiled = compile(&lm, instance.init.clone(), instance.goal.clone())?;
        provenance = compiled.provenance.clone();
        let result = planner::solve(&compiled.problem, &cfg.limits)?;
        match result.outcome {
            Outcome::Plan(plan) => {
                let truth_prob =
                    Problem::new(truth.clone(), instance.init, instance.goal)?;
                if sas::validate_plan(&plan, &truth_prob)?.success {
                    solved += 1;
                    plan_len_total += plan.len() as u64;
                } else {
                    unsafe_plans += 1;
                }
            }
            Outcome::NoPlan => {
                if is_solvable {
                    unsolved_solvable += 1;
                }
            }
            Outcome::ResourceLimit => {
                resource_limited += 1;
                resource_limited_solvable += u64::from(is_solvable);
            }
        }
    }

    let denom = solvable.saturating_sub(resource_limited_solvable);
    let total_draws = cfg.eval_instances + rejections;
    let record = ExperimentRecord {
        m,
        run,
        eval_instances: cfg.eval_instances,
        solvable,
        solved,
        unsolved_solvable,
        resource_limited,
        unsafe_plans,
        solve_rate: if denom == 0 { 1.0 } else { solved as f64 / denom as f64 },
        mean_plan_length: if solved == 0 {
            0.0
        } else {
            plan_len_total as f64 / solved as f64
        },
        empirical_mu: solvable as f64 / total_draws as f64,
        p_plan_unconditional: solved as f64 / total_draws as f64,
        provenance,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    if cfg.progress {
        eprintln!(
            "experiment m={m} run={run}: solve_rate={:.4} mu={:.4} unsafe={} ({} ms)",
            record.solve_rate, record.empirical_mu, record.unsafe_plans, record.wall_time_ms
        );
    }
    Ok(record)
}

/// Runs the full sweep over the logistics domain named by the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let truth = gen_logistics(&cfg.domain)?;
    run_experiment_on(&truth, cfg)
}

/// Runs the sweep against an explicit ground-truth model (the config's
/// domain shape is ignored). Cells execute in parallel on the current
/// rayon pool; records come back sorted by (m, run) and are deterministic
/// given the config (wall times aside).
pub fn run_experiment_on(
    truth: &sas::ActionModel,
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    cfg.validate()?;
    let cells: Vec<(u64, u64)> = cfg
        .m_values
        .iter()
        .flat_map(|&m| (0..cfg.runs).map(move |run| (m, run)))
        .collect();
    let mut records = cells
        .into_par_iter()
        .map(|(m, run)| run_cell(truth, cfg, m, run))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| (r.m, r.run));
    Ok(records)
}

/// Verdict of the run-level check: with what fraction of runs did the
/// conditional failure rate stay within epsilon, and does that fraction
/// reach 1 - delta?
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PacVerdict {
    pub required_m: u128,
    /// False when no record reaches the required corpus size.
    pub applicable: bool,
    pub runs_total: u64,
    pub runs_within_epsilon: u64,
    pub fraction_within_epsilon: f64,
    pub max_failure_rate: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub pass: bool,
}

/// Scores records taken at sufficient corpus size against the target
/// (epsilon, delta). Records below the required m are ignored; if none
/// qualify the verdict is marked not applicable.
pub fn check_pac_claim(
    records: &[ExperimentRecord],
    params: &PacParams,
) -> Result<PacVerdict, ExperimentError> {
    let required_m = sample_complexity(params)?;
    let qualifying: Vec<&ExperimentRecord> =
        records.iter().filter(|r| r.m as u128 >= required_m).collect();
    let runs_total = qualifying.len() as u64;
    let runs_within_epsilon =
        qualifying.iter().filter(|r| r.failure_rate() <= params.epsilon).count() as u64;
    let fraction = if runs_total == 0 {
        0.0
    } else {
        runs_within_epsilon as f64 / runs_total as f64
    };
    let max_failure_rate =
        qualifying.iter().map(|r| r.failure_rate()).fold(0.0f64, f64::max);
    let applicable = runs_total > 0;
    Ok(PacVerdict {
        required_m,
        applicable,
        runs_total,
        runs_within_epsilon,
        fraction_within_epsilon: fraction,
        max_failure_rate,
        epsilon: params.epsilon,
        delta: params.delta,
        pass: applicable && fraction >= 1.0 - params.delta,
    })
}
