//! On-disk formats: JSON domains/problems/learned models, JSON-Lines
//! trajectory corpora, CSV experiment results, and the planner-input `.sas`
//! export. Names (not indices) appear on disk; indices are an in-memory
//! detail. All writers are deterministic: equal inputs give equal bytes.

mod json;
mod results;
mod sas_export;
mod traj;

pub use json::{
    parse_domain, parse_learned, parse_plan, parse_problem, serialize_domain,
    serialize_learned, serialize_plan, serialize_problem, ParsedProblem,
};
pub use results::{read_results_csv, write_results_csv};
pub use sas_export::write_sas;
pub use traj::{parse_trajectories, serialize_trajectories};

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::sas::SasError;

/// The single version stamp shared by all JSON artifact files.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {source}")]
    JsonLine { line: usize, source: serde_json::Error },
    #[error("unsupported schema_version {got} (this build reads version {expected})")]
    SchemaVersion { got: u32, expected: u32 },
    #[error("unknown variable `{name}`")]
    UnknownVariable { name: String },
    #[error("variable `{var}` has no value named `{value}`")]
    UnknownValue { var: String, value: String },
    #[error("state {index} is not total: variable `{name}` missing")]
    PartialState { index: usize, name: String },
    #[error("trajectory `{id}` step {step}: action `{action}` is unknown to the reference model")]
    UnknownReferenceAction { id: String, step: usize, action: String },
    #[error(
        "trajectory `{id}` step {step}: action `{action}` is not applicable in the recorded \
         pre-state under the reference model"
    )]
    InapplicableStep { id: String, step: usize, action: String },
    #[error(
        "trajectory `{id}` step {step}: recorded post-state disagrees with apply() under the \
         reference model"
    )]
    InconsistentStep { id: String, step: usize },
    #[error(transparent)]
    Sas(#[from] SasError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: bad field `{field}`")]
    CsvField { row: usize, field: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_version(got: u32) -> Result<(), FormatError> {
    if got == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(FormatError::SchemaVersion { got, expected: SCHEMA_VERSION })
    }
}

/// Writes via a temp file in the target directory plus an atomic rename, so
/// failures never leave partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
