//! Command-line front end for the `qmeas` simulator.
//!
//! Experiments are JSON documents describing a register, an initial state and a list
//! of circuit, channel and measurement stages. Results are written to stdout as a
//! single JSON document.

pub mod commands;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod plan;
pub mod pretty;

pub use error::{CliError, CliResult};
pub use exec::{execute, ResultReport};
pub use experiment::{ExperimentSpec, Mode};

/// Loads, validates and runs an experiment file with optional overrides.
pub fn run_file(path: &std::path::Path, shots: Option<u64>, seed: Option<u64>, mode: Option<Mode>) -> CliResult<ResultReport> {
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(s) = shots {
        spec.shots = s;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(m) = mode {
        spec.mode = m;
    }
    execute(&plan::build(&spec)?)
}
