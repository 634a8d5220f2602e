//! Acceptance suite: one test per criterion, each printing its own
//! pass/fail line through the harness. Every tolerance is pinned in the
//! assertions below.
//!
//! Criteria 1/3/4 share one deterministic family of randomized cases
//! (domain shape, corpus, evaluation draws) so the bounds audit and replay
//! guarantee cover exactly the corpora whose plans are soundness-checked.

mod common;

use common::{delivery_t1, random_logistics, sample_corpus};
use safeplan::audit::{audit_bounds, audit_safety, AuditMode, ViolationKind};
use safeplan::bench::{gen_logistics, sample_instance, DistConfig, LogisticsConfig};
use safeplan::compiler::compile;
use safeplan::experiment::{run_experiment, ExperimentConfig, MuMode};
use safeplan::learner::{learn, learned_to_model, LearnedModel};
use safeplan::pac::{
    epsilon_for_gamma, gamma_for_epsilon, sample_complexity, solvability_table, PacParams,
};
use safeplan::planner::{reachable_states, solve, solve_bfs, Limits, Outcome};
use safeplan::rng::stream;
use safeplan::sas::{self, Action, ActionModel, Plan, Problem};

use rand::Rng;

struct Case {
    truth: ActionModel,
    corpus: Vec<safeplan::sas::Trajectory>,
    learned: LearnedModel,
}

/// 110 randomized (domain config, corpus) cases spanning 2-5 locations,
/// 1-2 trucks, 1-2 packages, with corpus sizes 1..=24.
fn shared_cases() -> Vec<Case> {
    (0..110u64)
        .map(|i| {
            let mut rng = stream(0xacce97, &[i]);
            let (_, truth) = random_logistics(&mut rng);
            let m = rng.gen_range(1..=24);
            let corpus = sample_corpus(&truth, &DistConfig::default(), i ^ 0xc0ffee, m);
            let learned = learn(&corpus, truth.variables()).unwrap();
            Case { truth, corpus, learned }
        })
        .collect()
}

/// Criterion 1 — soundness: across >= 1000 randomized (config, corpus,
/// instance) cases, every plan returned by the conservative pipeline
/// validates against the hidden ground truth. Required: 0 failures.
#[test]
fn criterion_01_soundness() {
    let cases = shared_cases();
    let mut total = 0u32;
    let mut plans_found = 0u32;
    for (ci, case) in cases.iter().enumerate() {
        for ei in 0..10u64 {
            total += 1;
            let mut rng = stream(0x501d, &[ci as u64, ei]);
            let draw = sample_instance(&case.truth, &DistConfig::default(), &mut rng)
                .unwrap()
                .instance;
            let compiled =
                compile(&case.learned, draw.init.clone(), draw.goal.clone()).unwrap();
            let result = solve(&compiled.problem, &Limits::default()).unwrap();
            if let Outcome::Plan(plan) = result.outcome {
                let truth_prob =
                    Problem::new(case.truth.clone(), draw.init, draw.goal).unwrap();
                let report = sas::validate_plan(&plan, &truth_prob).unwrap();
                assert!(
                    report.success,
                    "case {ci}/{ei}: compiled plan fails on the ground truth"
                );
                plans_found += 1;
            }
        }
    }
    assert!(total >= 1000, "only {total} cases");
    assert!(plans_found > 100, "pipeline found too few plans ({plans_found}) to be meaningful");
    println!("criterion 1: {plans_found}/{total} plans found, 0 soundness failures");
}

/// Criterion 2 — safety: exhaustive audits report safe for >= 100 learned
/// models, and 100 constructed precondition-deletion mutations are all
/// caught with verifying counterexamples.
#[test]
fn criterion_02_safety() {
    let cases = shared_cases();
    assert!(cases.len() >= 100);
    let mut audited = 0;
    for (ci, case) in cases.iter().enumerate() {
        assert!(case.truth.state_space_size() <= 50_000);
        let learned = learned_to_model(&case.learned).unwrap();
        let report = audit_safety(&learned, &case.truth, AuditMode::exhaustive()).unwrap();
        assert!(report.safe, "case {ci}: {:?}", report.counterexample);
        assert_eq!(report.states_checked as u128, case.truth.state_space_size());
        audited += 1;
    }

    let mut mutations = 0;
    'outer: for (ci, case) in cases.iter().enumerate() {
        let learned = learned_to_model(&case.learned).unwrap();
        for (name, action) in learned.actions() {
            if mutations >= 100 {
                break 'outer;
            }
            // Delete a learned precondition entry that is a true
            // precondition; a witness state exists because the variable's
            // domain has at least two values.
            let truth_action = case.truth.action(name).expect("observed actions exist");
            let Some(&(var, _val)) = truth_action.pre().entries().first() else {
                continue;
            };
            let mut pre = action.pre().clone();
            assert!(pre.remove(var).is_some(), "containment guarantees the entry");
            let mutated = Action::new(name.clone(), pre, action.eff().clone());
            let actions: Vec<Action> = learned
                .actions()
                .values()
                .map(|a| if a.name() == name { mutated.clone() } else { a.clone() })
                .collect();
            let broken = ActionModel::new(learned.variables().to_vec(), actions).unwrap();
            let report = audit_safety(&broken, &case.truth, AuditMode::exhaustive()).unwrap();
            assert!(!report.safe, "case {ci}, mutation of `{name}` was not caught");
            let cx = report.counterexample.expect("unsafe implies counterexample");

            // The counterexample must re-verify through the execution
            // semantics.
            let witness = safeplan::sas::State::new(cx.state.clone(), case.truth.variables())
                .expect("witness is a well-formed state");
            let learned_action = broken.action(&cx.action).unwrap();
            assert!(sas::is_applicable(&witness, learned_action).unwrap());
            match cx.kind {
                ViolationKind::InapplicableUnderTruth => {
                    let truth_action = case.truth.action(&cx.action).unwrap();
                    assert!(!sas::is_applicable(&witness, truth_action).unwrap());
                }
                ViolationKind::StateMismatch => {
                    let truth_action = case.truth.action(&cx.action).unwrap();
                    assert_ne!(
                        sas::apply(&witness, learned_action).unwrap(),
                        sas::apply(&witness, truth_action).unwrap()
                    );
                }
            }
            mutations += 1;
        }
    }
    assert_eq!(mutations, 100, "needed 100 verified mutations");
    println!("criterion 2: {audited} clean audits, {mutations}/100 mutations caught");
}

/// Criterion 3 — bound containment: the bounds audit is clean on every
/// criterion-1 corpus. Required: 0 violations.
#[test]
fn criterion_03_bound_containment() {
    let cases = shared_cases();
    for (ci, case) in cases.iter().enumerate() {
        let report = audit_bounds(&case.learned, &case.truth, &case.corpus).unwrap();
        assert!(report.clean(), "case {ci}: {:?}", report.violations);
    }
    println!("criterion 3: 0 bound violations over {} corpora", cases.len());
}

/// Criterion 4 — replay: every training trajectory validates under its own
/// learned compiled model. Required: 0 violations.
#[test]
fn criterion_04_replay_guarantee() {
    let cases = shared_cases();
    let mut replayed = 0;
    for (ci, case) in cases.iter().enumerate() {
        let compiled = learned_to_model(&case.learned).unwrap();
        for traj in &case.corpus {
            let prob = Problem::new(
                compiled.clone(),
                traj.first_state().clone(),
                traj.last_state().to_partial(),
            )
            .unwrap();
            let report =
                sas::validate_plan(&Plan::new(traj.actions.clone()), &prob).unwrap();
            assert!(report.success, "case {ci}: trajectory `{}` does not replay", traj.id);
            assert_eq!(report.states, traj.states);
            replayed += 1;
        }
    }
    println!("criterion 4: {replayed} trajectories replayed, 0 violations");
}

/// Criterion 5 — formula exactness against the independent high-precision
/// oracle (mpmath, 80 digits, evaluated before this implementation): the
/// anchor case equals 3629 and the epsilon-halving property holds exactly
/// on the pre-ceiling value for 50 random parameter sets.
#[test]
fn criterion_05_formula_exactness() {
    // (d, |A|, |X|, epsilon, delta, m, m at epsilon/2). The oracle asserted
    // m(eps/2) == ceil(2 * real(eps)) for every row.
    const ORACLE: &[(u64, u64, u64, f64, f64, u128, u128)] = &[
        (4, 12, 2, 0.1, 0.05, 3629, 7258),
        (4, 12, 2, 0.25, 0.2, 1186, 2371),
        (51, 30, 141, 0.287779, 0.296374, 121867, 243734),
        (54, 272, 4, 0.432741, 0.400537, 72248, 144495),
        (2, 157, 11, 0.842515, 0.0545, 6069, 12138),
        (33, 187, 50, 0.633861, 0.06055, 129133, 258265),
        (6, 106, 153, 0.489015, 0.098308, 127449, 254897),
        (29, 111, 120, 0.470462, 0.224276, 206486, 412971),
        (32, 49, 58, 0.120736, 0.351446, 186012, 372023),
        (17, 175, 3, 0.987797, 0.479748, 12560, 25119),
        (34, 246, 114, 0.743938, 0.356538, 290190, 580379),
        (41, 34, 3, 0.886788, 0.011533, 4422, 8843),
        (62, 220, 159, 0.349391, 0.045479, 895208, 1790415),
        (16, 417, 15, 0.488686, 0.236033, 126749, 253498),
        (2, 248, 166, 0.604845, 0.080762, 101510, 203019),
        (26, 489, 53, 0.55734, 0.460316, 366204, 732407),
        (27, 306, 6, 0.691026, 0.202667, 51257, 102514),
        (32, 27, 195, 0.829929, 0.28649, 45678, 91355),
        (57, 109, 105, 0.053902, 0.267439, 1875056, 3750111),
        (42, 87, 69, 0.280186, 0.194258, 182923, 365846),
        (43, 369, 85, 0.918051, 0.378414, 290047, 580094),
        (40, 330, 136, 0.463119, 0.458587, 770118, 1540235),
        (51, 282, 21, 0.159464, 0.408943, 437069, 874137),
        (29, 253, 195, 0.97199, 0.153103, 362319, 724637),
        (12, 173, 50, 0.817288, 0.451556, 62680, 125359),
        (6, 105, 42, 0.686735, 0.427517, 27911, 55822),
        (38, 472, 17, 0.197831, 0.270902, 499325, 998649),
        (12, 258, 95, 0.837209, 0.152744, 163449, 326897),
        (59, 413, 10, 0.53451, 0.08216, 146789, 293578),
        (5, 185, 100, 0.681207, 0.138777, 97366, 194732),
        (26, 427, 160, 0.204972, 0.339145, 2325305, 4650610),
        (24, 467, 66, 0.951843, 0.167899, 244619, 489238),
        (44, 493, 145, 0.983485, 0.01298, 611621, 1223242),
        (37, 438, 110, 0.749418, 0.057765, 522912, 1045824),
        (10, 93, 144, 0.607558, 0.236406, 108290, 216580),
        (40, 56, 17, 0.375595, 0.217631, 28609, 57217),
        (31, 251, 7, 0.993023, 0.442416, 29769, 59538),
        (5, 73, 65, 0.534473, 0.034173, 33880, 67759),
        (49, 252, 155, 0.071272, 0.339957, 4555659, 9111318),
        (62, 447, 124, 0.07703, 0.402637, 6471946, 12943892),
        (13, 377, 112, 0.045725, 0.464509, 5188190, 10376379),
        (32, 262, 79, 0.287202, 0.403089, 564945, 1129890),
        (16, 495, 65, 0.252718, 0.355232, 830292, 1660583),
        (8, 295, 114, 0.341599, 0.122213, 453388, 906775),
        (42, 31, 3, 0.569693, 0.260561, 4432, 8864),
        (4, 386, 100, 0.198778, 0.430515, 596592, 1193183),
        (64, 296, 125, 0.777201, 0.339938, 430088, 860175),
        (14, 384, 192, 0.223757, 0.01757, 1878777, 3757553),
        (26, 469, 72, 0.454302, 0.222072, 565368, 1130735),
        (53, 367, 99, 0.726919, 0.35852, 440985, 881969),
        (24, 104, 168, 0.988553, 0.095822, 119752, 239504),
        (27, 315, 39, 0.984415, 0.357119, 105009, 210017),
    ];
    for &(d, a, x, epsilon, delta, m, m_half) in ORACLE {
        let params = PacParams { d, num_actions: a, num_vars: x, epsilon, delta };
        assert_eq!(sample_complexity(&params).unwrap(), m, "params {params:?}");
        let halved = PacParams { epsilon: epsilon / 2.0, ..params };
        assert_eq!(sample_complexity(&halved).unwrap(), m_half, "halved {halved:?}");
    }
    println!("criterion 5: {} oracle rows exact, halving exact", ORACLE.len());
}

/// Criterion 6 — empirical guarantee at desk scale: logistics(3,1,1),
/// epsilon 0.25, delta 0.2, m = 1186, 20 runs x 200 solvable evals; the
/// fraction of runs with conditional failure rate <= epsilon must reach
/// 0.75.
#[test]
fn criterion_06_empirical_pac() {
    let params = PacParams { d: 4, num_actions: 12, num_vars: 2, epsilon: 0.25, delta: 0.2 };
    let m = sample_complexity(&params).unwrap();
    assert_eq!(m, 1186);
    let cfg = ExperimentConfig {
        domain: LogisticsConfig::new(3, 1, 1),
        dist: DistConfig::default(),
        m_values: vec![m as u64],
        eval_instances: 200,
        runs: 20,
        epsilon: params.epsilon,
        delta: params.delta,
        master_seed: 0x6ac,
        mu_mode: MuMode::ExactSolvable,
        limits: Limits::default(),
        progress: false,
    };
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 20);
    for r in &records {
        assert_eq!(r.unsafe_plans, 0);
        assert_eq!(r.solvable, 200, "solvable-only sampling");
    }
    let within = records.iter().filter(|r| r.failure_rate() <= params.epsilon).count();
    let fraction = within as f64 / records.len() as f64;
    assert!(fraction >= 0.75, "fraction {fraction} below 0.75");
    let worst = records.iter().map(|r| r.failure_rate()).fold(0.0f64, f64::max);
    println!(
        "criterion 6: fraction within epsilon = {fraction}, worst failure rate = {worst}"
    );
}

/// Criterion 7 — monotonicity: mean solve rate over 10 runs is
/// non-decreasing (tolerance 0.02) across m in {1, 5, 20, 100, 1186}.
#[test]
fn criterion_07_monotonicity() {
    let m_values = vec![1u64, 5, 20, 100, 1186];
    let cfg = ExperimentConfig {
        domain: LogisticsConfig::new(3, 1, 1),
        dist: DistConfig::default(),
        m_values: m_values.clone(),
        eval_instances: 200,
        runs: 10,
        epsilon: 0.25,
        delta: 0.2,
        master_seed: 0x707,
        mu_mode: MuMode::ExactSolvable,
        limits: Limits::default(),
        progress: false,
    };
    let records = run_experiment(&cfg).unwrap();
    let means: Vec<f64> = m_values
        .iter()
        .map(|&m| {
            let runs: Vec<&_> = records.iter().filter(|r| r.m == m).collect();
            runs.iter().map(|r| r.solve_rate).sum::<f64>() / runs.len() as f64
        })
        .collect();
    for pair in means.windows(2) {
        assert!(
            pair[1] >= pair[0] - 0.02,
            "mean solve rate decreased beyond tolerance: {means:?}"
        );
    }
    println!("criterion 7: mean solve rates {means:?}");
}

/// Criterion 8 — planner cross-check: A* and BFS agree on outcome and plan
/// length on 200 random instances with <= 10,000 reachable states, and
/// every no-plan answer matches explicit reachability enumeration.
#[test]
fn criterion_08_planner_cross_check() {
    let mut no_plans = 0;
    for case in 0..200u64 {
        let mut rng = stream(0x8c8c, &[case]);
        let (_, truth) = random_logistics(&mut rng);
        // Small corpora produce incomplete models, making both verdicts
        // common.
        let m = (case % 5) as usize;
        let corpus = sample_corpus(&truth, &DistConfig::default(), case ^ 0x31de, m);
        let model = learned_to_model(&learn(&corpus, truth.variables()).unwrap()).unwrap();
        let draw =
            sample_instance(&truth, &DistConfig::default(), &mut rng).unwrap().instance;
        let prob = Problem::new(model, draw.init, draw.goal).unwrap();

        let reach = reachable_states(&prob.model, &prob.init, 10_000).unwrap();
        assert!(reach.len() <= 10_000);

        let astar = solve(&prob, &Limits::default()).unwrap();
        let bfs = solve_bfs(&prob, &Limits::default()).unwrap();
        match (&astar.outcome, &bfs.outcome) {
            (Outcome::Plan(a), Outcome::Plan(b)) => {
                assert_eq!(a.len(), b.len(), "case {case}");
                assert!(sas::validate_plan(a, &prob).unwrap().success);
            }
            (Outcome::NoPlan, Outcome::NoPlan) => {
                assert!(reach.iter().all(|s| !sas::satisfies_goal(s, &prob.goal).unwrap()));
                no_plans += 1;
            }
            other => panic!("case {case}: disagreement {other:?}"),
        }
    }
    println!("criterion 8: 200 instances agree ({no_plans} unsolvable, all reachability-checked)");
}

/// Criterion 9 — calculator identities: table rows and marginals for 1000
/// random (mu, epsilon); gamma round-trip within 1-ulp-scale tolerance for
/// 1000 random (gamma, mu) in (0,1)^2.
#[test]
fn criterion_09_calculator_identities() {
    let mut rng = stream(0x9ca1c, &[]);
    for _ in 0..1000 {
        let mu: f64 = rng.gen_range(0.0..=1.0);
        let eps: f64 = rng.gen_range(0.0..=1.0);
        let t = solvability_table(mu, eps).unwrap();
        assert_eq!(t.p_plan_given_solvable + t.p_no_plan_given_solvable, 1.0);
        assert_eq!(t.p_plan_given_unsolvable + t.p_no_plan_given_unsolvable, 1.0);
        assert_eq!(t.p_plan + t.p_no_plan, 1.0);
        assert!((t.p_plan - mu * (1.0 - eps)).abs() <= f64::EPSILON);
    }
    for _ in 0..1000 {
        let gamma: f64 = rng.gen_range(1e-12..1.0);
        let mu: f64 = rng.gen_range(1e-12..1.0);
        let eps = epsilon_for_gamma(gamma, mu).unwrap();
        let back = gamma_for_epsilon(eps, mu).unwrap();
        assert!(
            (back - gamma).abs() <= 4.0 * f64::EPSILON * gamma,
            "gamma {gamma}, mu {mu}: round trip {back}"
        );
    }
    println!("criterion 9: 1000 table identities, 1000 round trips within tolerance");
}

/// Criterion 10 — precondition shrinkage: learning from the single
/// drive-pickup-drive-unload trajectory yields the over-restrictive move
/// precondition, and one more trajectory with the package elsewhere
/// shrinks it to the truck position alone.
#[test]
fn criterion_10_precondition_shrinkage() {
    let truth = gen_logistics(&LogisticsConfig::new(3, 1, 1)).unwrap();
    let truck = truth.variable_by_name("TruckAt").unwrap();
    let package = truth.variable_by_name("PackageAt").unwrap();
    let t1 = delivery_t1(&truth);

    let lm = learn(std::slice::from_ref(&t1), truth.variables()).unwrap();
    let restrictive = &lm.actions["Move_A_B"].pre_upper;
    assert_eq!(restrictive.len(), 2);
    assert_eq!(restrictive.get(truck.id), truck.value_index("A"));
    assert_eq!(restrictive.get(package.id), package.value_index("B"));

    // A second trajectory moving A -> B with the package at A.
    let t2 = safeplan::sas::Trajectory::new(
        "T2",
        vec![
            common::state_by_names(&truth, &[("TruckAt", "A"), ("PackageAt", "A")]),
            common::state_by_names(&truth, &[("TruckAt", "B"), ("PackageAt", "A")]),
        ],
        vec!["Move_A_B".to_string()],
        None,
    )
    .unwrap();
    let lm = learn(&[t1, t2], truth.variables()).unwrap();
    let shrunk = &lm.actions["Move_A_B"].pre_upper;
    assert_eq!(shrunk.len(), 1);
    assert_eq!(shrunk.get(truck.id), truck.value_index("A"));
    println!("criterion 10: over-restrictive precondition learned, then shrunk");
}

/// Criterion 11 — determinism: two full pipeline executions through the
/// binary with identical seeds produce byte-identical CSV and .sas files.
#[test]
fn criterion_11_byte_determinism() {
    fn full_pipeline(dir: &std::path::Path) -> (Vec<u8>, Vec<u8>) {
        let bin = env!("CARGO_BIN_EXE_safeplan");
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin).args(args).output().unwrap();
            assert!(
                out.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        let p = |name: &str| dir.join(name).to_str().unwrap().to_string();
        run(&["gen-domain", "--locations", "3", "--out", &p("d.json")]);
        run(&[
            "sample", "--domain", &p("d.json"), "--n", "25", "--seed", "5", "--out",
            &p("t.jsonl"), "--problem-out", &p("p.json"),
        ]);
        run(&[
            "learn", "--trajectories", &p("t.jsonl"), "--domain-vars", &p("d.json"), "--id",
            "det", "--out", &p("m.json"),
        ]);
        run(&[
            "compile", "--model", &p("m.json"), "--problem", &p("p.json"), "--out",
            &p("c.json"), "--sas-out", &p("c.sas"),
        ]);
        run(&[
            "experiment", "--m", "1,3", "--runs", "2", "--eval", "20", "--seed", "9", "--out",
            &p("r.csv"), "--jobs", "2",
        ]);
        (std::fs::read(dir.join("c.sas")).unwrap(), std::fs::read(dir.join("r.csv")).unwrap())
    }
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let (sas_a, csv_a) = full_pipeline(dir_a.path());
    let (sas_b, csv_b) = full_pipeline(dir_b.path());
    assert_eq!(sas_a, sas_b, ".sas outputs differ");
    assert_eq!(csv_a, csv_b, "CSV outputs differ");
    assert!(!sas_a.is_empty() && !csv_a.is_empty());
    println!("criterion 11: {} .sas bytes and {} CSV bytes identical", sas_a.len(), csv_a.len());
}
