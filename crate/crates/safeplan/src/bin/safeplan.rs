//! Command-line front end for the conservative planning pipeline:
//! generate a ground-truth domain, sample trajectories, learn a safe model,
//! compile, plan, validate, audit, and run the statistical harness.
//!
//! Exit codes: 0 success; 1 negative verdict (no plan found, invalid plan,
//! unsafe model); 2 usage or validation error; 3 resource limit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use safeplan::audit::{audit_bounds, audit_safety, AuditMode};
use safeplan::bench::{
    gen_logistics, sample_instance, DistConfig, GoalMode, LogisticsConfig, TrajectoryMode,
};
use safeplan::compiler::compile;
use safeplan::experiment::{check_pac_claim, run_experiment, ExperimentConfig, MuMode};
use safeplan::io;
use safeplan::learner::learn_with_id;
use safeplan::pac::{
    epsilon_for_gamma, sample_complexity, sample_complexity_real, solvability_table, PacParams,
};
use safeplan::planner::{solve, solve_bfs, Limits, Outcome};
use safeplan::rng::stream;
use safeplan::sas::{Problem, Trajectory};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "safeplan",
    about = "Conservative action-model learning and safe planning from execution traces",
    version,
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a ground-truth logistics domain file.
    GenDomain(GenDomainArgs),
    /// Sample instances and trajectories from a domain.
    Sample(SampleArgs),
    /// Learn a conservative model from a trajectory corpus.
    Learn(LearnArgs),
    /// Compile a learned model with a start/goal pair into a problem.
    Compile(CompileArgs),
    /// Solve a problem with the built-in optimal planner.
    Plan(PlanArgs),
    /// Validate a plan against a problem.
    Validate(ValidateArgs),
    /// Audit a learned model against a ground-truth domain.
    Audit(AuditArgs),
    /// Print the trajectory-count bound for given parameters.
    Bound(BoundArgs),
    /// Print the solvability probability table for (mu, epsilon).
    Table(TableArgs),
    /// Run the statistical harness and write a results CSV.
    Experiment(ExperimentArgs),
}

#[derive(clap::Args)]
struct GenDomainArgs {
    #[arg(long, default_value_t = 3)]
    locations: usize,
    #[arg(long, default_value_t = 1)]
    trucks: usize,
    #[arg(long, default_value_t = 1)]
    packages: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Optimal,
    RandomOptimal,
    RandomWalk,
}

impl From<ModeArg> for TrajectoryMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Optimal => TrajectoryMode::Optimal,
            ModeArg::RandomOptimal => TrajectoryMode::RandomizedOptimal,
            ModeArg::RandomWalk => TrajectoryMode::RandomWalk,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GoalModeArg {
    /// Project goal values from a state reachable from init.
    Reachable,
    /// Draw goal values uniformly (unsolvable combinations possible).
    Uniform,
}

impl From<GoalModeArg> for GoalMode {
    fn from(m: GoalModeArg) -> Self {
        match m {
            GoalModeArg::Reachable => GoalMode::ReachableProjection,
            GoalModeArg::Uniform => GoalMode::UniformValues,
        }
    }
}

#[derive(clap::Args)]
struct SampleArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Number of instances to draw.
    #[arg(long)]
    n: u64,
    #[arg(long)]
    seed: u64,
    /// Trajectory corpus output (JSON Lines).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one sampled instance as a problem file.
    #[arg(long)]
    problem_out: Option<PathBuf>,
    /// Which sampled instance the problem file records.
    #[arg(long, default_value_t = 0)]
    problem_index: u64,
    #[arg(long, default_value_t = 0.5)]
    goal_density: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Optimal)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = GoalModeArg::Reachable)]
    goal_mode: GoalModeArg,
    /// Keep unsolvable draws instead of rejecting and resampling.
    #[arg(long, default_value_t = false)]
    allow_unsolvable: bool,
    #[arg(long, default_value_t = 10)]
    max_walk: usize,
}

#[derive(clap::Args)]
struct LearnArgs {
    #[arg(long)]
    trajectories: PathBuf,
    /// Domain file providing the variable declarations (actions ignored).
    #[arg(long)]
    domain_vars: PathBuf,
    /// Optionally check each trajectory step against this reference domain.
    #[arg(long)]
    reference_domain: Option<PathBuf>,
    /// Provenance id recorded in the model file (default: output stem).
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CompileArgs {
    /// Learned model file.
    #[arg(long)]
    model: PathBuf,
    /// Problem file supplying the start state and goal (its actions are ignored).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also export the compiled problem in planner-input text format.
    #[arg(long)]
    sas_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PlanArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Plan output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000_000)]
    max_generated: u64,
    #[arg(long, default_value_t = 60.0)]
    max_seconds: f64,
    /// Use the breadth-first oracle instead of A*.
    #[arg(long, default_value_t = false)]
    bfs: bool,
}

#[derive(clap::Args)]
struct ValidateArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    plan: PathBuf,
}

#[derive(clap::Args)]
struct AuditArgs {
    /// Learned model file to audit.
    #[arg(long)]
    model: PathBuf,
    /// Ground-truth domain file.
    #[arg(long)]
    truth: PathBuf,
    /// Also audit the learned bounds against this corpus.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    /// Check a uniform state sample of this size instead of exhaustively.
    #[arg(long)]
    sampled: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// State cap for exhaustive mode.
    #[arg(long, default_value_t = 50_000)]
    cap: u64,
    /// Report output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BoundArgs {
    /// Largest variable domain size.
    #[arg(long)]
    d: u64,
    #[arg(long)]
    actions: u64,
    #[arg(long)]
    vars: u64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: f64,
    /// Derive epsilon from a bound on P(solvable | no plan) instead.
    #[arg(long)]
    gamma: Option<f64>,
    /// Prior probability that a drawn instance is solvable (with --gamma).
    #[arg(long)]
    mu: Option<f64>,
}

#[derive(clap::Args)]
struct TableArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    epsilon: f64,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 3)]
    locations: usize,
    #[arg(long, default_value_t = 1)]
    trucks: usize,
    #[arg(long, default_value_t = 1)]
    packages: usize,
    /// Training corpus sizes, comma separated and ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    runs: u64,
    #[arg(long, default_value_t = 100)]
    eval: u64,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    goal_density: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Optimal)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = GoalModeArg::Reachable)]
    goal_mode: GoalModeArg,
    #[arg(long, default_value_t = false)]
    allow_unsolvable: bool,
    #[arg(long, value_enum, default_value_t = MuModeArg::Exact)]
    mu_mode: MuModeArg,
    /// Print the run-level verdict for (epsilon, delta) as JSON on stdout.
    #[arg(long, default_value_t = false)]
    check_pac: bool,
    #[arg(long, default_value_t = false)]
    progress: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MuModeArg {
    Exact,
    PlannerRelative,
}

type CliError = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Splices `--config FILE` (TOML, one section per subcommand) into the
/// argument list ahead of the explicit flags, so explicit flags win.
fn expand_config(raw: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(sub) = raw.get(1).filter(|s| !s.starts_with('-')).cloned() else {
        return Ok(raw);
    };
    let mut user_args = Vec::new();
    let mut config_path: Option<PathBuf> = None;
    let mut it = raw[2..].iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            let value = it.next().ok_or("--config requires a file path")?;
            config_path = Some(PathBuf::from(value));
        } else if let Some(value) = arg.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(value));
        } else {
            user_args.push(arg.clone());
        }
    }
    let Some(path) = config_path else {
        return Ok(raw);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let table: toml::Table = text.parse().map_err(|e| format!("bad config: {e}"))?;
    let mut args = vec![raw[0].clone(), sub.clone()];
    if let Some(toml::Value::Table(section)) = table.get(sub.as_str()) {
        for (key, value) in section {
            match value {
                toml::Value::Boolean(true) => args.push(format!("--{key}")),
                toml::Value::Boolean(false) => {}
                toml::Value::Array(items) => {
                    let joined: Vec<String> = items
                        .iter()
                        .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
                        .collect();
                    args.push(format!("--{key}"));
                    args.push(joined.join(","));
                }
                toml::Value::String(s) => {
                    args.push(format!("--{key}"));
                    args.push(s.clone());
                }
                other => {
                    args.push(format!("--{key}"));
                    args.push(other.to_string());
                }
            }
        }
    }
    args.extend(user_args);
    Ok(args)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::GenDomain(args) => gen_domain_cmd(args),
        Command::Sample(args) => sample_cmd(args),
        Command::Learn(args) => learn_cmd(args),
        Command::Compile(args) => compile_cmd(args),
        Command::Plan(args) => plan_cmd(args),
        Command::Validate(args) => validate_cmd(args),
        Command::Audit(args) => audit_cmd(args),
        Command::Bound(args) => bound_cmd(args),
        Command::Table(args) => table_cmd(args),
        Command::Experiment(args) => experiment_cmd(args),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => Ok(io::write_atomic(path, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_domain_cmd(args: GenDomainArgs) -> Result<u8, CliError> {
    let cfg =
        LogisticsConfig::new(args.locations, args.trucks, args.packages).with_seed(args.seed);
    let model = gen_logistics(&cfg)?;
    io::write_atomic(&args.out, io::serialize_domain(&model).as_bytes())?;
    eprintln!(
        "wrote {} ({} variables, {} actions)",
        args.out.display(),
        model.variables().len(),
        model.num_actions()
    );
    Ok(EXIT_OK)
}

fn sample_cmd(args: SampleArgs) -> Result<u8, CliError> {
    let truth = io::parse_domain(&read(&args.domain)?)?;
    let cfg = DistConfig {
        goal_density: args.goal_density,
        solvable_only: !args.allow_unsolvable,
        mode: args.mode.into(),
        goal_mode: args.goal_mode.into(),
        max_walk: args.max_walk,
        ..DistConfig::default()
    };
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut problem_file: Option<String> = None;
    let mut rejections = 0u64;
    let mut unsolvable = 0u64;
    for i in 0..args.n {
        let mut rng = stream(args.seed, &[i]);
        let sampled = sample_instance(&truth, &cfg, &mut rng)?;
        rejections += sampled.rejections as u64;
        let instance = sampled.instance;
        if args.problem_out.is_some() && i == args.problem_index {
            let prob =
                Problem::new(truth.clone(), instance.init.clone(), instance.goal.clone())?;
            problem_file = Some(io::serialize_problem(&prob, None));
        }
        match instance.trajectory {
            Some(mut traj) => {
                traj.id = format!("t{i}");
                trajectories.push(traj);
            }
            None => unsolvable += 1,
        }
    }
    if let Some(out) = &args.out {
        io::write_atomic(
            out,
            io::serialize_trajectories(&trajectories, truth.variables()).as_bytes(),
        )?;
    }
    if let Some(path) = &args.problem_out {
        let text = problem_file.ok_or_else(|| {
            format!("--problem-index {} is out of range (n = {})", args.problem_index, args.n)
        })?;
        io::write_atomic(path, text.as_bytes())?;
    }
    eprintln!(
        "sampled {} draws: {} trajectories, {} unsolvable kept, {} rejected",
        args.n,
        trajectories.len(),
        unsolvable,
        rejections
    );
    Ok(EXIT_OK)
}

fn learn_cmd(args: LearnArgs) -> Result<u8, CliError> {
    let vars_model = io::parse_domain(&read(&args.domain_vars)?)?;
    let reference = match &args.reference_domain {
        Some(path) => Some(io::parse_domain(&read(path)?)?),
        None => None,
    };
    let trajs = io::parse_trajectories(
        &read(&args.trajectories)?,
        vars_model.variables(),
        reference.as_ref(),
    )?;
    let id = args.id.unwrap_or_else(|| {
        args.out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "learned".into())
    });
    let lm = learn_with_id(id, &trajs, vars_model.variables())?;
    io::write_atomic(&args.out, io::serialize_learned(&lm).as_bytes())?;
    eprintln!(
        "learned {} actions from {} trajectories -> {}",
        lm.num_actions(),
        trajs.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn compile_cmd(args: CompileArgs) -> Result<u8, CliError> {
    let lm = io::parse_learned(&read(&args.model)?)?;
    let parsed = io::parse_problem(&read(&args.problem)?)?;
    if parsed.problem.model.variables() != lm.variables.as_slice() {
        return Err("problem and learned model declare different variables".into());
    }
    let compiled = compile(&lm, parsed.problem.init.clone(), parsed.problem.goal.clone())?;
    let text = io::serialize_problem(&compiled.problem, Some(&compiled.provenance));
    io::write_atomic(&args.out, text.as_bytes())?;
    if let Some(sas_out) = &args.sas_out {
        io::write_atomic(sas_out, io::write_sas(&compiled.problem).as_bytes())?;
    }
    eprintln!("compiled {} -> {}", compiled.provenance, args.out.display());
    Ok(EXIT_OK)
}

fn limits_from(max_generated: u64, max_seconds: f64) -> Limits {
    Limits { max_generated, max_time: std::time::Duration::from_secs_f64(max_seconds) }
}

fn plan_cmd(args: PlanArgs) -> Result<u8, CliError> {
    let parsed = io::parse_problem(&read(&args.problem)?)?;
    let limits = limits_from(args.max_generated, args.max_seconds);
    let result = if args.bfs {
        solve_bfs(&parsed.problem, &limits)?
    } else {
        solve(&parsed.problem, &limits)?
    };
    eprintln!(
        "expanded {} generated {} peak {} in {:?}",
        result.stats.expanded,
        result.stats.generated,
        result.stats.peak_frontier,
        result.stats.wall_time
    );
    match result.outcome {
        Outcome::Plan(plan) => {
            eprintln!("plan with {} steps", plan.len());
            emit(args.out.as_deref(), &io::serialize_plan(&plan))?;
            Ok(EXIT_OK)
        }
        Outcome::NoPlan => {
            eprintln!("no plan found");
            Ok(EXIT_NEGATIVE)
        }
        Outcome::ResourceLimit => {
            eprintln!("resource limit reached before an answer");
            Ok(EXIT_RESOURCE)
        }
    }
}

fn validate_cmd(args: ValidateArgs) -> Result<u8, CliError> {
    let parsed = io::parse_problem(&read(&args.problem)?)?;
    let plan = io::parse_plan(&read(&args.plan)?)?;
    let report = safeplan::sas::validate_plan(&plan, &parsed.problem)?;
    let vars = parsed.problem.model.variables();
    let mut out = String::new();
    writeln!(out, "{{").unwrap();
    writeln!(out, "  \"success\": {},", report.success).unwrap();
    writeln!(out, "  \"steps\": {},", plan.len()).unwrap();
    writeln!(out, "  \"final_state\": \"{}\"", report.final_state().render(vars)).unwrap();
    writeln!(out, "}}").unwrap();
    print!("{out}");
    if report.success {
        Ok(EXIT_OK)
    } else {
        match report.failure {
            Some(safeplan::sas::PlanFailure::Inapplicable { step }) => {
                eprintln!("plan invalid: step {step} not applicable")
            }
            _ => eprintln!("plan invalid: goal unsatisfied"),
        }
        Ok(EXIT_NEGATIVE)
    }
}

fn audit_cmd(args: AuditArgs) -> Result<u8, CliError> {
    let lm = io::parse_learned(&read(&args.model)?)?;
    let truth = io::parse_domain(&read(&args.truth)?)?;
    let learned = safeplan::learner::learned_to_model(&lm)?;
    let mode = match args.sampled {
        Some(samples) => AuditMode::Sampled { samples, seed: args.seed },
        None => AuditMode::Exhaustive { cap: args.cap },
    };
    let safety = audit_safety(&learned, &truth, mode)?;
    let bounds = match &args.trajectories {
        Some(path) => {
            let trajs = io::parse_trajectories(&read(path)?, truth.variables(), None)?;
            Some(audit_bounds(&lm, &truth, &trajs)?)
        }
        None => None,
    };
    let clean = safety.safe && bounds.as_ref().is_none_or(|b| b.clean());
    let report = serde_json::json!({
        "safety": safety,
        "bounds": bounds,
        "clean": clean,
    });
    emit(args.out.as_deref(), &format!("{report:#}\n"))?;
    Ok(if clean { EXIT_OK } else { EXIT_NEGATIVE })
}

fn bound_cmd(args: BoundArgs) -> Result<u8, CliError> {
    let epsilon = match (args.epsilon, args.gamma) {
        (Some(e), None) => e,
        (None, Some(gamma)) => {
            let mu = args.mu.ok_or("--gamma requires --mu")?;
            let eps = epsilon_for_gamma(gamma, mu)?;
            eprintln!("epsilon_max for gamma {gamma}, mu {mu}: {eps}");
            eps.min(1.0)
        }
        (Some(_), Some(_)) => return Err("pass either --epsilon or --gamma, not both".into()),
        (None, None) => return Err("one of --epsilon or --gamma is required".into()),
    };
    let params = PacParams {
        d: args.d,
        num_actions: args.actions,
        num_vars: args.vars,
        epsilon,
        delta: args.delta,
    };
    let real = sample_complexity_real(&params)?;
    let m = sample_complexity(&params)?;
    println!("{real}");
    println!("{m}");
    Ok(EXIT_OK)
}

fn table_cmd(args: TableArgs) -> Result<u8, CliError> {
    let table = solvability_table(args.mu, args.epsilon)?;
    println!("{:#}", serde_json::to_value(table)?);
    Ok(EXIT_OK)
}

fn experiment_cmd(args: ExperimentArgs) -> Result<u8, CliError> {
    let cfg = ExperimentConfig {
        domain: LogisticsConfig::new(args.locations, args.trucks, args.packages)
            .with_seed(args.seed),
        dist: DistConfig {
            goal_density: args.goal_density,
            solvable_only: !args.allow_unsolvable,
            mode: args.mode.into(),
            goal_mode: args.goal_mode.into(),
            ..DistConfig::default()
        },
        m_values: args.m.clone(),
        eval_instances: args.eval,
        runs: args.runs,
        epsilon: args.epsilon,
        delta: args.delta,
        master_seed: args.seed,
        mu_mode: match args.mu_mode {
            MuModeArg::Exact => MuMode::ExactSolvable,
            MuModeArg::PlannerRelative => MuMode::PlannerRelative,
        },
        limits: Limits::default(),
        progress: args.progress,
    };
    let records = match args.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
            pool.install(|| run_experiment(&cfg))?
        }
        None => run_experiment(&cfg)?,
    };
    io::write_atomic(&args.out, io::write_results_csv(&records)?.as_bytes())?;
    eprintln!("wrote {} records -> {}", records.len(), args.out.display());
    if args.check_pac {
        let truth = gen_logistics(&cfg.domain)?;
        let d = truth.variables().iter().map(|v| v.domain_size()).max().unwrap_or(2) as u64;
        let params = PacParams {
            d,
            num_actions: truth.num_actions() as u64,
            num_vars: truth.variables().len() as u64,
            epsilon: args.epsilon,
            delta: args.delta,
        };
        let verdict = check_pac_claim(&records, &params)?;
        println!("{:#}", serde_json::to_value(&verdict)?);
    }
    Ok(EXIT_OK)
}
