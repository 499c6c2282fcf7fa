use thiserror::Error;

use crate::curriculum::TaskId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("prerequisite graph contains a cycle: {}", .cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },

    #[error("duplicate task name `{0}`")]
    DuplicateTaskName(String),

    #[error("duplicate edge {pred} -> {succ}")]
    DuplicateEdge { pred: String, succ: String },

    #[error("task `{task}`: minimum estimate {min} must be strictly below maximum estimate {max}")]
    InvalidMinMax { task: String, min: f64, max: f64 },

    #[error("unknown task {0}")]
    UnknownTask(TaskId),

    #[error("unknown task name `{0}`")]
    UnknownTaskName(String),

    #[error("task {task}: timestep {got} is not after last recorded timestep {last}")]
    NonMonotonicTimestep { task: TaskId, last: u64, got: u64 },

    #[error("n_max must be positive, got {0}")]
    NonPositiveNMax(i64),

    #[error("parameter `{name}` = {value} out of range: {expected}")]
    InvalidParameter { name: String, value: f64, expected: String },

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unknown builtin curriculum `{0}`")]
    UnknownBuiltin(String),

    #[error("no run logs found in {0}")]
    EmptyLogDir(String),

    #[error("run log schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("learner failure: {0}")]
    Learner(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, value: f64, expected: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            value,
            expected: expected.into(),
        }
    }

    pub(crate) fn with_path(e: std::io::Error, path: &std::path::Path) -> Self {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    /// True for errors raised while checking inputs, as opposed to I/O or
    /// learner failures during a run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::CycleDetected { .. }
                | Error::DuplicateTaskName(_)
                | Error::DuplicateEdge { .. }
                | Error::InvalidMinMax { .. }
                | Error::UnknownTaskName(_)
                | Error::NonPositiveNMax(_)
                | Error::InvalidParameter { .. }
                | Error::ConfigParse { .. }
                | Error::InvalidConfig(_)
                | Error::UnknownBuiltin(_)
        )
    }
}
