//! End-to-end experiments driven by a TOML config, and their reports.

pub mod config;
pub mod report;
pub mod runs;

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{emit_report, exit_code, Flag, Format, Report};
pub use runs::{
    run_clr_experiment, run_covering_experiment, run_experiment, run_localization_experiment,
    run_nonsa_experiment, run_spectrum_experiment,
};
