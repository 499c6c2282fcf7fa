//! Experiment config files (JSON) and their validation.

use std::path::Path;

use serde::Deserialize;

use crate::attention::{Converter, ConverterParams, MrParams};
use crate::curriculum::{CurriculumDag, TaskSpec, DEFAULT_MAX_ESTIMATE, DEFAULT_MIN_ESTIMATE};
use crate::error::{Error, Result};
use crate::history::{DEFAULT_EWMA_ALPHA, DEFAULT_WINDOW};
use crate::scheduler::{AttentionProgram, SchedulerConfig, SchedulerKind};
use crate::simlearner::{BuiltinCurriculum, ReturnModel, SynthLearnerParams};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub curriculum: CurriculumSection,
    #[serde(default)]
    pub learner: SynthLearnerParams,
    #[serde(default)]
    pub scheduler: SchedulerSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumSection {
    pub builtin: Option<String>,
    pub tasks: Option<Vec<TaskEntry>>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub name: String,
    #[serde(default = "default_min")]
    pub min: f64,
    #[serde(default = "default_max")]
    pub max: f64,
    pub n_max: Option<i64>,
    /// Overrides the learner's `max_return` for this task.
    pub max_return: Option<f64>,
}

fn default_min() -> f64 {
    DEFAULT_MIN_ESTIMATE
}

fn default_max() -> f64 {
    DEFAULT_MAX_ESTIMATE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSection {
    pub kind: SchedulerKind,
    pub attention_program: AttentionProgram,
    /// Defaults to `prop` for the mastering-rate kind, `gprop` otherwise.
    pub converter: Option<Converter>,
    pub delta: f64,
    pub power: f64,
    pub gamma_pred: f64,
    pub gamma_succ: f64,
    pub window: usize,
    pub epsilon: f64,
    pub temperature: f64,
    pub ewma_alpha: f64,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        let mr = MrParams::default();
        let conv = ConverterParams::default();
        Self {
            kind: SchedulerKind::Mr,
            attention_program: AttentionProgram::Linreg,
            converter: None,
            delta: mr.delta,
            power: mr.power,
            gamma_pred: mr.gamma_pred,
            gamma_succ: mr.gamma_succ,
            window: DEFAULT_WINDOW,
            epsilon: conv.epsilon,
            temperature: conv.temperature,
            ewma_alpha: DEFAULT_EWMA_ALPHA,
        }
    }
}

impl SchedulerSection {
    pub fn to_config(&self) -> SchedulerConfig {
        let converter = self.converter.unwrap_or(match self.kind {
            SchedulerKind::Mr => Converter::Prop,
            SchedulerKind::TeacherStudent => Converter::Gprop,
        });
        SchedulerConfig {
            kind: self.kind,
            attention_program: self.attention_program,
            converter,
            mr_params: MrParams {
                delta: self.delta,
                power: self.power,
                gamma_pred: self.gamma_pred,
                gamma_succ: self.gamma_succ,
            },
            converter_params: ConverterParams {
                epsilon: self.epsilon,
                temperature: self.temperature,
            },
            ewma_alpha: self.ewma_alpha,
            window: self.window,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub steps: u64,
    pub seeds: Vec<u64>,
    pub parallel_actors: usize,
    pub batch_size: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            steps: 5000,
            seeds: (1..=10).collect(),
            parallel_actors: 1,
            batch_size: None,
        }
    }
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub curriculum: CurriculumDag,
    pub n_max: Vec<Option<i64>>,
    pub max_returns: Vec<f64>,
    pub learner: SynthLearnerParams,
    pub scheduler: SchedulerConfig,
    pub run: RunSection,
}

type BuiltCurriculum = (CurriculumDag, Vec<Option<i64>>, Vec<Option<f64>>);

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let message = match full.rsplit_once(" at line ") {
                Some((msg, _)) => msg.to_string(),
                None => full,
            };
            Error::ConfigParse {
                line: e.line(),
                column: e.column(),
                message,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    /// Every problem with the config, without stopping at the first.
    pub fn diagnostics(&self) -> Vec<Error> {
        let mut errs = Vec::new();
        if let Err(e) = self.build_curriculum(&mut errs) {
            errs.push(e);
        }
        errs.extend(self.learner.validate());
        errs.extend(self.scheduler.to_config().validate());
        if self.run.seeds.is_empty() {
            errs.push(Error::param("seeds", 0.0, "at least one seed"));
        }
        if self.run.steps == 0 {
            errs.push(Error::param("steps", 0.0, ">= 1"));
        }
        if self.run.parallel_actors == 0 {
            errs.push(Error::param("parallel_actors", 0.0, ">= 1"));
        }
        if let Some(b) = self.run.batch_size {
            if b == 0 {
                errs.push(Error::param("batch_size", 0.0, ">= 1"));
            }
            if self.run.parallel_actors > 1 {
                errs.push(Error::param(
                    "parallel_actors",
                    self.run.parallel_actors as f64,
                    "1 when batch_size is set",
                ));
            }
        }
        errs
    }

    pub fn resolve(&self) -> Result<Experiment> {
        if let Some(e) = self.diagnostics().into_iter().next() {
            return Err(e);
        }
        let mut sink = Vec::new();
        let (curriculum, n_max, overrides) = self.build_curriculum(&mut sink)?.expect("diagnostics were clean");
        let max_returns = overrides
            .into_iter()
            .map(|r| r.unwrap_or(self.learner.max_return))
            .collect();
        Ok(Experiment {
            curriculum,
            n_max,
            max_returns,
            learner: self.learner,
            scheduler: self.scheduler.to_config(),
            run: self.run.clone(),
        })
    }

    /// Builds the curriculum. Per-task problems are pushed onto `errs` and
    /// yield `None`; graph-level failures are returned as `Err`.
    fn build_curriculum(&self, errs: &mut Vec<Error>) -> Result<Option<BuiltCurriculum>> {
        let c = &self.curriculum;
        let (dag, n_max, overrides) = match (&c.builtin, &c.tasks) {
            (Some(name), None) => {
                let b = BuiltinCurriculum::from_name(name)?;
                if !c.edges.is_empty() {
                    return Err(Error::InvalidConfig(
                        "curriculum.edges cannot be combined with a builtin".into(),
                    ));
                }
                (b.curriculum(), b.n_max(), vec![None; b.tasks().len()])
            }
            (None, Some(tasks)) => {
                let before = errs.len();
                let mut seen = std::collections::HashSet::new();
                for t in tasks {
                    if !seen.insert(t.name.as_str()) {
                        errs.push(Error::DuplicateTaskName(t.name.clone()));
                    }
                    if t.min.is_nan() || t.max.is_nan() || t.min >= t.max {
                        errs.push(Error::InvalidMinMax {
                            task: t.name.clone(),
                            min: t.min,
                            max: t.max,
                        });
                    }
                    if let Some(n) = t.n_max {
                        if n <= 0 {
                            errs.push(Error::NonPositiveNMax(n));
                        }
                    }
                    if let Some(r) = t.max_return {
                        if !(r > 0.0 && r <= 1.0) {
                            errs.push(Error::param(format!("{}.max_return", t.name), r, "(0, 1]"));
                        }
                    }
                }
                for (p, s) in &c.edges {
                    for end in [p, s] {
                        if !seen.contains(end.as_str()) {
                            errs.push(Error::UnknownTaskName(end.clone()));
                        }
                    }
                }
                if errs.len() > before {
                    return Ok(None);
                }
                let specs = tasks.iter().map(|t| TaskSpec::new(&t.name, t.min, t.max)).collect();
                (
                    CurriculumDag::with_named_edges(specs, &c.edges)?,
                    tasks.iter().map(|t| t.n_max).collect(),
                    tasks.iter().map(|t| t.max_return).collect(),
                )
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "curriculum needs exactly one of `builtin` or `tasks`".into(),
                ))
            }
        };
        if self.learner.return_model == ReturnModel::EpisodeLength {
            for (i, n) in n_max.iter().enumerate() {
                if n.is_none() {
                    errs.push(Error::param(
                        format!("{}.n_max", dag.tasks()[i].name),
                        f64::NAN,
                        "required by the episode_length return model",
                    ));
                }
            }
        }
        Ok(Some((dag, n_max, overrides)))
    }
}

/// Result of `validate`: either a one-line OK summary or a list of problems.
#[derive(Debug)]
pub struct Diagnostics {
    pub errors: Vec<Error>,
    pub tasks: usize,
    pub edges: usize,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn render(&self) -> String {
        if self.is_ok() {
            format!("OK, {} tasks, {} edges", self.tasks, self.edges)
        } else {
            self.errors
                .iter()
                .map(|e| format!("error: {e}"))
                .collect::<Vec<_>>()
                .join("\n")
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::with_path(e, path))
}

pub fn validate_text(text: &str) -> Diagnostics {
    let cfg = match ConfigFile::parse(text) {
        Ok(cfg) => cfg,
        Err(e) => {
            return Diagnostics {
                errors: vec![e],
                tasks: 0,
                edges: 0,
            }
        }
    };
    let errors = cfg.diagnostics();
    let (tasks, edges) = if errors.is_empty() {
        let exp = cfg.resolve().expect("diagnostics were clean");
        (exp.curriculum.len(), exp.curriculum.edges().len())
    } else {
        (0, 0)
    };
    Diagnostics { errors, tasks, edges }
}

pub fn validate_path(path: &Path) -> Result<Diagnostics> {
    Ok(validate_text(&read_text(path)?))
}
