//! Config files, batch runs, CSV logs and cross-seed reports.

pub mod config;
pub mod report;
pub mod run;
pub mod runlog;

pub use config::{validate_path, validate_text, ConfigFile, Diagnostics, Experiment, RunSection};
pub use report::{report, Summary, TaskSummary};
pub use run::run_to_dir;
pub use runlog::{RunLog, RunLogWriter};
