//! Configuration-driven experiment runner behind the `erts` binary.

pub mod commands;
pub mod config;
pub mod validate;

pub use commands::{cmd_simulate, cmd_theory, theory_document, SimulateOutputs, TheoryDocument};
pub use config::{ConfigError, Experiment, ExperimentConfig, SCHEMA_VERSION};
pub use validate::{run_invariant_suite, CheckOutcome};
