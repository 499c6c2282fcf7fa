//! Synthetic learners standing in for RL agents and supervised models.
//!
//! Competence on each task grows linearly with training, scaled by how well
//! its direct prerequisites are known (`gate^q`). Training a task also
//! nudges its direct prerequisites upward (backward transfer). Returns are
//! the competence scaled by the task's maximum mean return, plus bounded
//! uniform noise. This is a surrogate with the two properties the
//! schedulers care about: unreachable tasks show no progress, and nearly
//! learned tasks keep a nonzero measured slope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curriculum::{CurriculumDag, TaskId, TaskSpec};
use crate::error::{Error, Result};

/// Something a scheduler can train one task at a time.
pub trait Learner {
    /// Trains once on `task` and reports the observed return.
    fn train(&mut self, task: TaskId) -> Result<f64>;
}

/// Learner trained on mixed minibatches and scored on every task.
pub trait BatchLearner {
    /// `counts[c]` examples of task `c`.
    fn train_batch(&mut self, counts: &[usize]) -> Result<()>;
    fn evaluate(&mut self, task: TaskId) -> Result<f64>;
}

impl<L: Learner + ?Sized> Learner for &mut L {
    fn train(&mut self, task: TaskId) -> Result<f64> {
        (**self).train(task)
    }
}

impl<L: BatchLearner + ?Sized> BatchLearner for &mut L {
    fn train_batch(&mut self, counts: &[usize]) -> Result<()> {
        (**self).train_batch(counts)
    }

    fn evaluate(&mut self, task: TaskId) -> Result<f64> {
        (**self).evaluate(task)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnModel {
    /// `R_c * k_c`
    #[default]
    Linear,
    /// Sparse episode reward `1 - n / n_max` with episode length
    /// `n = round(n_max * (1 - 0.9 k_c))`.
    EpisodeLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthLearnerParams {
    pub learning_rate: f64,
    pub gate_exponent: f64,
    /// Half-width of the uniform return noise.
    pub noise: f64,
    /// Maximum mean return, used for every task without an override.
    pub max_return: f64,
    pub backward_transfer: f64,
    pub return_model: ReturnModel,
}

impl Default for SynthLearnerParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            gate_exponent: 2.0,
            noise: 0.05,
            max_return: 0.9,
            backward_transfer: 0.25,
            return_model: ReturnModel::Linear,
        }
    }
}

impl SynthLearnerParams {
    pub fn validate(&self) -> Vec<Error> {
        let mut errs = Vec::new();
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            errs.push(Error::param("learning_rate", self.learning_rate, "> 0"));
        }
        if !(self.gate_exponent >= 1.0 && self.gate_exponent.is_finite()) {
            errs.push(Error::param("gate_exponent", self.gate_exponent, ">= 1"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            errs.push(Error::param("noise", self.noise, ">= 0"));
        }
        if !(self.max_return > 0.0 && self.max_return <= 1.0) {
            errs.push(Error::param("max_return", self.max_return, "(0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.backward_transfer) {
            errs.push(Error::param("backward_transfer", self.backward_transfer, "[0, 1]"));
        }
        errs
    }
}

/// `1 - n / n_max` for `n <= n_max`, otherwise 0.
pub fn reward_shaping(n: i64, n_max: i64) -> Result<f64> {
    if n_max <= 0 {
        return Err(Error::NonPositiveNMax(n_max));
    }
    if n < 0 {
        return Err(Error::param("episode length", n as f64, ">= 0"));
    }
    if n > n_max {
        return Ok(0.0);
    }
    Ok(1.0 - n as f64 / n_max as f64)
}

/// Episode length a learner with competence `k` takes on a task.
pub fn episode_length(k: f64, n_max: i64) -> i64 {
    (n_max as f64 * (1.0 - 0.9 * k)).round() as i64
}

#[derive(Debug, Clone)]
pub struct SyntheticLearner {
    params: SynthLearnerParams,
    predecessors: Vec<Vec<TaskId>>,
    max_returns: Vec<f64>,
    n_max: Vec<Option<i64>>,
    competence: Vec<f64>,
    rng: ChaCha8Rng,
}

impl SyntheticLearner {
    pub fn new(dag: &CurriculumDag, params: SynthLearnerParams, rng: ChaCha8Rng) -> Self {
        let n = dag.len();
        Self {
            params,
            predecessors: dag.task_ids().map(|c| dag.graph().predecessors(c).to_vec()).collect(),
            max_returns: vec![params.max_return; n],
            n_max: vec![None; n],
            competence: vec![0.0; n],
            rng,
        }
    }

    pub fn seeded(dag: &CurriculumDag, params: SynthLearnerParams, seed: u64) -> Self {
        Self::new(dag, params, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_max_returns(mut self, max_returns: Vec<f64>) -> Self {
        assert_eq!(max_returns.len(), self.competence.len());
        self.max_returns = max_returns;
        self
    }

    pub fn with_n_max(mut self, n_max: Vec<Option<i64>>) -> Self {
        assert_eq!(n_max.len(), self.competence.len());
        self.n_max = n_max;
        self
    }

    pub fn params(&self) -> &SynthLearnerParams {
        &self.params
    }

    pub fn competence(&self, c: TaskId) -> f64 {
        self.competence[c.index()]
    }

    pub fn competences(&self) -> &[f64] {
        &self.competence
    }

    pub fn max_return(&self, c: TaskId) -> f64 {
        self.max_returns[c.index()]
    }

    fn check(&self, c: TaskId) -> Result<()> {
        if c.index() < self.competence.len() {
            Ok(())
        } else {
            Err(Error::UnknownTask(c))
        }
    }

    /// Minimum competence over direct prerequisites; 1 without any.
    pub fn gate(&self, c: TaskId) -> f64 {
        self.predecessors[c.index()]
            .iter()
            .map(|p| self.competence[p.index()])
            .fold(1.0, f64::min)
    }

    fn learn(&mut self, c: TaskId) {
        let lr = self.params.learning_rate;
        let q = self.params.gate_exponent;
        let gain = lr * self.gate(c).powf(q);
        let k = &mut self.competence[c.index()];
        *k = (*k + gain).min(1.0);
        if self.params.backward_transfer > 0.0 {
            for i in 0..self.predecessors[c.index()].len() {
                let p = self.predecessors[c.index()][i];
                let gain = self.params.backward_transfer * lr * self.gate(p).powf(q);
                let k = &mut self.competence[p.index()];
                *k = (*k + gain).min(1.0);
            }
        }
    }

    fn noise(&mut self) -> f64 {
        let nu = self.params.noise;
        if nu > 0.0 {
            self.rng.gen_range(-nu..=nu)
        } else {
            0.0
        }
    }

    fn clean_return(&self, c: TaskId) -> Result<f64> {
        let k = self.competence[c.index()];
        match self.params.return_model {
            ReturnModel::Linear => Ok(self.max_returns[c.index()] * k),
            ReturnModel::EpisodeLength => {
                let n_max = self.n_max[c.index()].ok_or(Error::NonPositiveNMax(0))?;
                reward_shaping(episode_length(k, n_max), n_max)
            }
        }
    }

    fn upper_bound(&self, c: TaskId) -> f64 {
        match self.params.return_model {
            ReturnModel::Linear => self.max_returns[c.index()],
            ReturnModel::EpisodeLength => 1.0,
        }
    }

    /// One training invocation; returns the clamped noisy return.
    pub fn train_once(&mut self, c: TaskId) -> Result<f64> {
        self.check(c)?;
        self.learn(c);
        let r = self.clean_return(c)? + self.noise();
        Ok(r.clamp(0.0, self.upper_bound(c)))
    }

    /// Noisy score without training.
    pub fn evaluate_once(&mut self, c: TaskId) -> Result<f64> {
        self.check(c)?;
        Ok(self.clean_return(c)? + self.noise())
    }
}

impl Learner for SyntheticLearner {
    fn train(&mut self, task: TaskId) -> Result<f64> {
        self.train_once(task)
    }
}

impl BatchLearner for SyntheticLearner {
    /// Each example is one competence update; tasks are applied in id order.
    fn train_batch(&mut self, counts: &[usize]) -> Result<()> {
        if counts.len() != self.competence.len() {
            return Err(Error::Learner(format!(
                "batch has {} task counts, curriculum has {} tasks",
                counts.len(),
                self.competence.len()
            )));
        }
        for (i, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                self.learn(TaskId(i));
            }
        }
        Ok(())
    }

    fn evaluate(&mut self, task: TaskId) -> Result<f64> {
        self.evaluate_once(task)
    }
}

/// The built-in synthetic stand-ins for the benchmark curricula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinCurriculum {
    /// BlockedUnlockPickup: three tasks in a line.
    Chain3,
    /// KeyCorridor: six tasks in a line.
    Chain6,
    /// ObstructedMaze: six tasks on two branches. The edge set is our own
    /// reading of that curriculum's diagram, not a published list.
    Dag6,
    /// Decimal addition with 1 to 9 digits.
    Chain9,
}

const ADDITION_TASKS: [&str; 9] = ["add1", "add2", "add3", "add4", "add5", "add6", "add7", "add8", "add9"];

pub struct BuiltinTask {
    pub name: &'static str,
    pub n_max: Option<i64>,
}

impl BuiltinCurriculum {
    pub const ALL: [BuiltinCurriculum; 4] = [Self::Chain3, Self::Chain6, Self::Dag6, Self::Chain9];

    pub fn name(self) -> &'static str {
        match self {
            Self::Chain3 => "chain3",
            Self::Chain6 => "chain6",
            Self::Dag6 => "dag6",
            Self::Chain9 => "chain9",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::UnknownBuiltin(name.to_string()))
    }

    pub fn tasks(self) -> Vec<BuiltinTask> {
        let t = |name, n_max| BuiltinTask { name, n_max };
        match self {
            Self::Chain3 => vec![
                t("Unlock", Some(288)),
                t("UnlockPickup", Some(288)),
                t("BlockedUnlockPickup", Some(576)),
            ],
            Self::Chain6 => vec![
                t("S3R1", Some(270)),
                t("S3R2", Some(270)),
                t("S3R3", Some(270)),
                t("S4R3", Some(480)),
                t("S5R3", Some(750)),
                t("S6R3", Some(1080)),
            ],
            Self::Dag6 => vec![
                t("1Dl", Some(288)),
                t("1Dlh", Some(288)),
                t("1Dlhb", Some(288)),
                t("2Dl", Some(576)),
                t("2Dlh", Some(576)),
                t("2Dlhb", Some(576)),
            ],
            Self::Chain9 => ADDITION_TASKS.iter().map(|&name| t(name, None)).collect(),
        }
    }

    pub fn edges(self) -> Vec<(&'static str, &'static str)> {
        match self {
            Self::Dag6 => vec![
                ("1Dl", "1Dlh"),
                ("1Dlh", "1Dlhb"),
                ("1Dl", "2Dl"),
                ("2Dl", "2Dlh"),
                ("2Dlh", "2Dlhb"),
                ("1Dlh", "2Dlh"),
            ],
            _ => {
                let tasks = self.tasks();
                tasks.windows(2).map(|w| (w[0].name, w[1].name)).collect()
            }
        }
    }

    /// The curriculum with the default (0, 0.5) return estimates.
    pub fn curriculum(self) -> CurriculumDag {
        let tasks = self.tasks().iter().map(|t| TaskSpec::named(t.name)).collect();
        CurriculumDag::with_named_edges(tasks, &self.edges()).expect("builtin curricula are valid")
    }

    pub fn n_max(self) -> Vec<Option<i64>> {
        self.tasks().iter().map(|t| t.n_max).collect()
    }
}
