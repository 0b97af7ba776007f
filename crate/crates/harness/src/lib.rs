//! Experiment harness: JSON scenario configs, design runs, sweeps,
//! complexity benchmarks and a validation suite, all emitting CSV.

pub mod bench;
pub mod config;
pub mod error;
pub mod run;
pub mod sweep;
pub mod validate;

pub use bench::{run_bench, BenchRow, BenchSpec};
pub use config::{Scenario, ScenarioConfig};
pub use error::{Error, Result};
pub use run::{run_design, write_csv, ResultRow};
pub use sweep::{run_sweep, Axis, SweepSpec};
pub use validate::{run_validate, ValidateOptions, ValidationReport};
