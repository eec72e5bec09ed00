//! Configuration, count-file ingestion, counting statistics and reports.

pub mod analysis;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod report;

pub use analysis::{run_analysis, AnalysisReport};
pub use config::Config;
pub use dataset::{ingest_counts, CountDataset, CountRow};
pub use report::emit_report;
