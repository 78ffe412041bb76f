//! Experiment registry, execution and reporting.

mod presets;
pub mod properties;
mod runner;
mod spec;
mod tables;

pub use presets::{preset, preset_registry};
pub use runner::{
    asymptotic_order, run_experiment, write_outputs, Artifacts, ExpectationOutcome, LevelRecord,
    RunOptions, RunRecord,
};
pub use spec::{Axis, DataCase, Expectation, ExperimentSpec, Levels, Norm};
pub use tables::{emit_tables, parse_table, table, Table, TableFormat};
