//! Config-driven experiments: parsing, dispatch, caching and reports.

mod cache;
mod cli;
mod config;
mod families;
mod report;
mod tasks;

pub use cache::{content_hash, Cache, CacheStats};
pub use cli::{main_with_args, Cli, EXIT_COMPUTATION, EXIT_CONFIG, EXIT_OK};
pub use config::{
    parse_config, CapacityParams, CombWeight, ConfigError, ExperimentConfig, Format, FormBoundConfig, GridConfig,
    MeasureSpec, OperatorConfig, PotentialSpec, SolverConfig, Task,
};
pub use report::{emit_report, format_float, ReportRecord, Table, Value, SCHEMA_VERSION};
pub use tasks::run_experiment;
