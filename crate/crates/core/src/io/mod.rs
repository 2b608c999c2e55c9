//! Configuration files and run artifacts (CSV, JSON, SVG).

pub mod config;
pub mod output;
pub mod svg;

pub use config::{ConfigError, InitialData, MonitorKind, OutputPaths, RunConfig};
pub use output::{
    evaluate_monitors, exit_code, fmt17, records_to_csv, MonitorSet, RunStatistics, RunSummary, SCHEMA_VERSION,
};
