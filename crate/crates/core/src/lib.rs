//! Curriculum scheduling over min-max ordered task graphs.
//!
//! The crate provides the Teacher-Student program algorithms (learning
//! progress as attention, with argmax, Boltzmann or proportional
//! conversion) and the mastering-rate scheduler, which attends to tasks
//! that are learnable but not yet learned. A synthetic learner and an
//! experiment runner make the schedulers observable without training a
//! real agent.

pub mod attention;
pub mod curriculum;
pub mod error;
pub mod experiment;
pub mod history;
pub mod scheduler;
pub mod simlearner;

pub use attention::{AttentionVector, Converter, ConverterParams, MasteryState, MrParams, TaskDistribution};
pub use curriculum::{CurriculumDag, GraphIndex, TaskId, TaskSpec};
pub use error::{Error, Result};
pub use history::ReturnHistory;
pub use scheduler::{AttentionProgram, Scheduler, SchedulerConfig, SchedulerKind, StepOutcome};
pub use simlearner::{BatchLearner, BuiltinCurriculum, Learner, SynthLearnerParams, SyntheticLearner};
