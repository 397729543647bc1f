//! Experiment configs, per-id verification suites and reports.

pub mod catalog;
pub mod config;
pub mod report;
pub mod suites;

pub use catalog::{all_default_configs, catalog_builtin, default_config, default_config_file, Catalog, SeriesSpec};
pub use config::{CaseSpec, ExperimentConfig, ResolutionSpec, Thresholds, CONFIG_VERSION, THEOREM_IDS};
pub use report::{emit_report, CaseReport, ReportFormat, VerificationReport};
pub use suites::run_suite;
