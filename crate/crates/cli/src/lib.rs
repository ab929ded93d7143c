//! Experiment drivers for `graphnls`: configuration, regime checks, runs and
//! CSV output.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Config, ConfigError, ExperimentName, ExperimentSpec, Perturbation};
pub use experiments::{
    run_blowup_scan, run_delta_prime_suite, run_stability_demo, run_threshold_table, run_verify_profile,
    run_verify_virial, Check, CheckReport, ExperimentError,
};
pub use output::Table;

/// Version string written into every output header.
pub const VERSION: &str = concat!("graphnls ", env!("CARGO_PKG_VERSION"));
