//! Export to the de-facto planner-input `.sas` text format (translator
//! version 3), so compiled problems can be handed to off-the-shelf
//! planners. Export only; this crate never reads `.sas` files back.

use std::fmt::Write;

use crate::sas::Problem;

/// Renders `prob` in the translator text format: version and metric
/// headers, one variable block per variable (in id order), zero mutex
/// groups, initial state, goal, one operator per action (in name order)
/// with prevail conditions for unaffected precondition variables and
/// pre/post rows for affected ones, unit cost, zero axioms. Deterministic:
/// equal problems give identical bytes.
pub fn write_sas(prob: &Problem) -> String {
    let vars = prob.model.variables();
    let mut out = String::new();
    out.push_str("begin_version\n3\nend_version\n");
    out.push_str("begin_metric\n0\nend_metric\n");

    writeln!(out, "{}", vars.len()).unwrap();
    for spec in vars {
        out.push_str("begin_variable\n");
        writeln!(out, "var{}", spec.id).unwrap();
        out.push_str("-1\n");
        writeln!(out, "{}", spec.domain_size()).unwrap();
        for value in &spec.value_names {
            writeln!(out, "Atom {}({})", spec.name, value).unwrap();
        }
        out.push_str("end_variable\n");
    }

    // No mutex groups.
    out.push_str("0\n");

    out.push_str("begin_state\n");
    for &val in prob.init.values() {
        writeln!(out, "{val}").unwrap();
    }
    out.push_str("end_state\n");

    out.push_str("begin_goal\n");
    writeln!(out, "{}", prob.goal.len()).unwrap();
    for &(var, val) in prob.goal.entries() {
        writeln!(out, "{var} {val}").unwrap();
    }
    out.push_str("end_goal\n");

    writeln!(out, "{}", prob.model.num_actions()).unwrap();
    for action in prob.model.actions().values() {
        out.push_str("begin_operator\n");
        writeln!(out, "{}", action.name()).unwrap();
        let prevail: Vec<(u16, u16)> = action
            .pre()
            .entries()
            .iter()
            .copied()
            .filter(|&(var, _)| action.eff().get(var).is_none())
            .collect();
        writeln!(out, "{}", prevail.len()).unwrap();
        for (var, val) in prevail {
            writeln!(out, "{var} {val}").unwrap();
        }
        writeln!(out, "{}", action.eff().len()).unwrap();
        for &(var, post) in action.eff().entries() {
            let pre = action.pre().get(var).map(|v| v as i32).unwrap_or(-1);
            writeln!(out, "0 {var} {pre} {post}").unwrap();
        }
        out.push_str("1\nend_operator\n");
    }

    // No axioms.
    out.push_str("0\n");
    out
}
