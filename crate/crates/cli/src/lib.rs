//! Benchmark orchestration for netsynth: configuration, the end-to-end
//! pipeline, comparison reports and figure data.

pub mod artifact;
pub mod config;
pub mod pipeline;
pub mod plots;
pub mod report;

pub use config::RunConfig;
pub use pipeline::{prepare, run_benchmark, Prepared, RunOutcome};
pub use plots::emit_plot_data;
pub use report::{emit_report, ReportRow};
