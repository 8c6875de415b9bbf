//! Prime sweeps over the registry and report persistence.

pub mod report;
pub mod sweep;

pub use report::{
    exit_code, read_report, render, write_report, ConjectureSummary, Report, ReportFormat, Summary,
    REPORT_SCHEMA_VERSION,
};
pub use sweep::{parse_range, run_sweep, run_sweep_with, ConfigError, SweepConfig};
