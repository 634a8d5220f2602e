//! CSV serialization for experiment records (RFC-4180 via the csv crate).
//!
//! Wall-clock time is deliberately not a column: result files must be
//! byte-identical across reruns with the same seed, and timing is reported
//! on the progress log instead.

use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::experiment::ExperimentRecord;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    m: u64,
    run: u64,
    eval_instances: u64,
    solvable: u64,
    solved: u64,
    unsolved_solvable: u64,
    resource_limited: u64,
    unsafe_plans: u64,
    solve_rate: f64,
    mean_plan_length: f64,
    empirical_mu: f64,
    p_plan_unconditional: f64,
    provenance: String,
}

impl From<&ExperimentRecord> for Row {
    fn from(r: &ExperimentRecord) -> Self {
        Row {
            m: r.m,
            run: r.run,
            eval_instances: r.eval_instances,
            solvable: r.solvable,
            solved: r.solved,
            unsolved_solvable: r.unsolved_solvable,
            resource_limited: r.resource_limited,
            unsafe_plans: r.unsafe_plans,
            solve_rate: r.solve_rate,
            mean_plan_length: r.mean_plan_length,
            empirical_mu: r.empirical_mu,
            p_plan_unconditional: r.p_plan_unconditional,
            provenance: r.provenance.clone(),
        }
    }
}

impl From<Row> for ExperimentRecord {
    fn from(r: Row) -> Self {
        ExperimentRecord {
            m: r.m,
            run: r.run,
            eval_instances: r.eval_instances,
            solvable: r.solvable,
            solved: r.solved,
            unsolved_solvable: r.unsolved_solvable,
            resource_limited: r.resource_limited,
            unsafe_plans: r.unsafe_plans,
            solve_rate: r.solve_rate,
            mean_plan_length: r.mean_plan_length,
            empirical_mu: r.empirical_mu,
            p_plan_unconditional: r.p_plan_unconditional,
            provenance: r.provenance,
            wall_time_ms: 0,
        }
    }
}

/// Header plus one row per record, in input order.
pub fn write_results_csv(records: &[ExperimentRecord]) -> Result<String, FormatError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in records {
        writer.serialize(Row::from(record))?;
    }
    if records.is_empty() {
        // serde-driven headers are only emitted alongside a row.
        writer.write_record([
            "m",
            "run",
            "eval_instances",
            "solvable",
            "solved",
            "unsolved_solvable",
            "resource_limited",
            "unsafe_plans",
            "solve_rate",
            "mean_plan_length",
            "empirical_mu",
            "p_plan_unconditional",
            "provenance",
        ])?;
    }
    let bytes = writer.into_inner().expect("vec sink cannot fail");
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses records back; `wall_time_ms` (not serialized) reads as zero.
pub fn read_results_csv(text: &str) -> Result<Vec<ExperimentRecord>, FormatError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        out.push(row?.into());
    }
    Ok(out)
}
