//! Scenario-driven front end for the `dunkl_pauli` library.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ScenarioConfig};
pub use run::{run, RunError, RunSummary, Subcommand};
