//! Scenario files, self-describing output tables, parameter sweeps and the
//! validation suite for `nads-core`.

pub mod commands;
pub mod scenario;
pub mod shipped;
pub mod table;
pub mod validate;

pub use commands::{evolve_table, snapshot_table, sweep_table, worker_count, Axis, Reduce};
pub use scenario::{load_scenario, ParseError, Scenario, ScenarioError};
pub use table::Table;

use nads_core::NadsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] NadsError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("validation failed: {}", .0.join(", "))]
    ChecksFailed(Vec<&'static str>),
}

impl CliError {
    /// 1 for input and validation problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}
