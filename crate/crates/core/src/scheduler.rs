//! Program loops: compute attention, convert it to a distribution, draw
//! tasks, train, record.
//!
//! One [`Scheduler`] covers the sequential loop ([`Scheduler::step`]), the
//! parallel-actor loop ([`Scheduler::step_parallel`]) and the supervised
//! minibatch loop ([`Scheduler::step_batch`]). The attention program is
//! either Teacher-Student (`|slope|` per task) or mastering-rate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{self, AttentionVector, Converter, ConverterParams, MasteryState, MrParams, TaskDistribution};
use crate::curriculum::{CurriculumDag, TaskId};
use crate::error::{Error, Result};
use crate::history::{ReturnHistory, DEFAULT_EWMA_ALPHA, DEFAULT_WINDOW};
use crate::simlearner::{BatchLearner, Learner};

const SAMPLER_STREAM: u64 = 0;
const LEARNER_STREAM: u64 = 1;

/// Independent task-sampling and learner streams derived from one seed.
pub fn seed_streams(master: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut sampler = ChaCha8Rng::seed_from_u64(master);
    sampler.set_stream(SAMPLER_STREAM);
    let mut learner = ChaCha8Rng::seed_from_u64(master);
    learner.set_stream(LEARNER_STREAM);
    (sampler, learner)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    TeacherStudent,
    Mr,
}

/// Learning-progress estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionProgram {
    /// Windowed regression slope.
    #[default]
    Linreg,
    /// Exponentially smoothed windowed regression slope.
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    pub attention_program: AttentionProgram,
    pub converter: Converter,
    pub mr_params: MrParams,
    pub converter_params: ConverterParams,
    pub ewma_alpha: f64,
    /// Return window size `K`.
    pub window: usize,
}

impl SchedulerConfig {
    /// Teacher-Student, Linreg attention, gProp converter.
    pub fn gprop_linreg() -> Self {
        Self {
            kind: SchedulerKind::TeacherStudent,
            attention_program: AttentionProgram::Linreg,
            converter: Converter::Gprop,
            mr_params: MrParams::default(),
            converter_params: ConverterParams::default(),
            ewma_alpha: DEFAULT_EWMA_ALPHA,
            window: DEFAULT_WINDOW,
        }
    }

    /// Mastering-rate attention with Prop conversion.
    pub fn mastering_rate() -> Self {
        Self {
            kind: SchedulerKind::Mr,
            converter: Converter::Prop,
            ..Self::gprop_linreg()
        }
    }

    pub fn teacher_student(program: AttentionProgram, converter: Converter) -> Self {
        Self {
            attention_program: program,
            converter,
            ..Self::gprop_linreg()
        }
    }

    pub fn validate(&self) -> Vec<Error> {
        let mut errs = self.mr_params.validate();
        errs.extend(self.converter_params.validate());
        if !(self.ewma_alpha > 0.0 && self.ewma_alpha <= 1.0) {
            errs.push(Error::param("ewma_alpha", self.ewma_alpha, "(0, 1]"));
        }
        if self.window < 1 {
            errs.push(Error::param("window", self.window as f64, ">= 1"));
        }
        errs
    }
}

/// Everything observed during one scheduler step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub timestep: u64,
    /// Draws from `distribution`, in draw order.
    pub sampled: Vec<TaskId>,
    pub distribution: TaskDistribution,
    /// Recorded returns, in recording order.
    pub returns: Vec<(TaskId, f64)>,
    /// Mastering rate of every task after this step's updates.
    pub mastering_rates: Vec<f64>,
    /// Running mean return of every task after this step's updates.
    pub running_means: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    dag: CurriculumDag,
    config: SchedulerConfig,
    history: ReturnHistory,
    mastery: MasteryState,
    rng: ChaCha8Rng,
    steps: u64,
    /// History clock; advances once per recorded draw.
    clock: u64,
}

impl Scheduler {
    pub fn new(dag: CurriculumDag, config: SchedulerConfig, rng: ChaCha8Rng) -> Result<Self> {
        if let Some(e) = config.validate().into_iter().next() {
            return Err(e);
        }
        let history = ReturnHistory::for_curriculum(&dag, config.window).with_alpha(config.ewma_alpha);
        let mastery = MasteryState::new(&dag);
        Ok(Self {
            dag,
            config,
            history,
            mastery,
            rng,
            steps: 0,
            clock: 0,
        })
    }

    /// Scheduler drawing from the sampler stream of `seed`.
    pub fn seeded(dag: CurriculumDag, config: SchedulerConfig, seed: u64) -> Result<Self> {
        Self::new(dag, config, seed_streams(seed).0)
    }

    pub fn curriculum(&self) -> &CurriculumDag {
        &self.dag
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn history(&self) -> &ReturnHistory {
        &self.history
    }

    pub fn mastery(&self) -> &MasteryState {
        &self.mastery
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Current learning-progress estimate of every task.
    pub fn slopes(&self) -> Vec<f64> {
        self.dag
            .task_ids()
            .map(|c| match self.config.attention_program {
                AttentionProgram::Linreg => self.history.linreg_slope(c),
                AttentionProgram::Window => self.history.smoothed_beta(c),
            })
            .collect()
    }

    /// Attention before conversion. For the mastering-rate kind this is the
    /// redistributed attention.
    pub fn attention(&self) -> AttentionVector {
        let slopes = self.slopes();
        match self.config.kind {
            SchedulerKind::TeacherStudent => {
                AttentionVector::from_nonnegative(slopes.iter().map(|s| s.abs()).collect())
            }
            SchedulerKind::Mr => {
                let graph = self.dag.graph();
                let raw = attention::mr_attention(&self.mastery, graph, &slopes, &self.config.mr_params);
                attention::redistribute(&raw, graph, &self.config.mr_params)
            }
        }
    }

    pub fn next_distribution(&self) -> TaskDistribution {
        self.config
            .converter
            .convert(&self.attention(), &self.config.converter_params)
    }

    /// Records one return at history time `timestep` and refreshes the
    /// slope and mastery state of that task.
    pub fn record(&mut self, task: TaskId, timestep: u64, ret: f64) -> Result<()> {
        self.history.record(task, timestep, ret)?;
        if self.config.attention_program == AttentionProgram::Window {
            self.history.window_beta(task);
        }
        self.mastery.update(task, &self.history);
        Ok(())
    }

    fn outcome(
        &self,
        sampled: Vec<TaskId>,
        distribution: TaskDistribution,
        returns: Vec<(TaskId, f64)>,
    ) -> StepOutcome {
        StepOutcome {
            timestep: self.steps,
            sampled,
            distribution,
            returns,
            mastering_rates: self.mastery.mastering_rates(),
            running_means: self.dag.task_ids().map(|c| self.mastery.running_mean(c)).collect(),
        }
    }

    /// Sequential loop: one draw, one training call.
    pub fn step<L: Learner + ?Sized>(&mut self, learner: &mut L) -> Result<StepOutcome> {
        self.step_parallel(learner, 1)
    }

    /// Parallel-actor loop: `k` i.i.d. draws from one distribution, `k`
    /// training calls, returns recorded in draw order.
    pub fn step_parallel<L: Learner + ?Sized>(&mut self, learner: &mut L, k: usize) -> Result<StepOutcome> {
        if k == 0 {
            return Err(Error::param("parallel_actors", 0.0, ">= 1"));
        }
        let dist = self.next_distribution();
        let sampled: Vec<TaskId> = (0..k).map(|_| dist.sample(&mut self.rng)).collect();
        let mut returns = Vec::with_capacity(k);
        for &c in &sampled {
            returns.push((c, learner.train(c)?));
        }
        self.steps += 1;
        for &(c, r) in &returns {
            self.clock += 1;
            self.record(c, self.clock, r)?;
        }
        Ok(self.outcome(sampled, dist, returns))
    }

    /// Supervised loop: a minibatch of `k` examples with task counts drawn
    /// from the distribution, one training call, then a score for every
    /// task, all recorded at the same history time.
    pub fn step_batch<L: BatchLearner + ?Sized>(&mut self, learner: &mut L, k: usize) -> Result<StepOutcome> {
        if k == 0 {
            return Err(Error::param("batch_size", 0.0, ">= 1"));
        }
        let dist = self.next_distribution();
        let sampled: Vec<TaskId> = (0..k).map(|_| dist.sample(&mut self.rng)).collect();
        let mut counts = vec![0usize; self.dag.len()];
        for c in &sampled {
            counts[c.index()] += 1;
        }
        learner.train_batch(&counts)?;
        let mut returns = Vec::with_capacity(self.dag.len());
        for c in self.dag.task_ids() {
            returns.push((c, learner.evaluate(c)?));
        }
        self.steps += 1;
        self.clock += 1;
        for &(c, r) in &returns {
            self.record(c, self.clock, r)?;
        }
        Ok(self.outcome(sampled, dist, returns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::TaskSpec;
    use crate::simlearner::{SynthLearnerParams, SyntheticLearner};

    struct Fixed(f64);

    impl Learner for Fixed {
        fn train(&mut self, _: TaskId) -> Result<f64> {
            Ok(self.0)
        }
    }

    impl BatchLearner for Fixed {
        fn train_batch(&mut self, _: &[usize]) -> Result<()> {
            Ok(())
        }

        fn evaluate(&mut self, _: TaskId) -> Result<f64> {
            Ok(self.0)
        }
    }

    fn two_tasks() -> CurriculumDag {
        CurriculumDag::edgeless(vec![TaskSpec::named("A"), TaskSpec::named("B")]).unwrap()
    }

    fn close(got: &[f64], want: &[f64]) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn fresh_mr_on_chain() {
        let dag = CurriculumDag::chain(&["A", "B"]).unwrap();
        let s = Scheduler::seeded(dag, SchedulerConfig::mastering_rate(), 0).unwrap();
        close(s.attention().weights(), &[0.456, 0.024]);
        close(s.next_distribution().probs(), &[0.95, 0.05]);
    }

    #[test]
    fn fresh_teacher_student_is_uniform() {
        let s = Scheduler::seeded(two_tasks(), SchedulerConfig::gprop_linreg(), 0).unwrap();
        close(s.next_distribution().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn gamax_window_distribution() {
        let cfg = SchedulerConfig::teacher_student(AttentionProgram::Window, Converter::Gamax);
        let mut s = Scheduler::seeded(two_tasks(), cfg, 0).unwrap();
        // A: slope 0.1 after two samples at alpha 1; B: slope 0.9
        s.config.ewma_alpha = 1.0;
        s.history = ReturnHistory::new(2, 10).with_alpha(1.0);
        for (c, pts) in [(0, [(1, 0.0), (2, 0.1)]), (1, [(3, 0.0), (4, 0.9)])] {
            for (t, r) in pts {
                s.record(TaskId(c), t, r).unwrap();
            }
        }
        close(s.attention().weights(), &[0.1, 0.9]);
        close(s.next_distribution().probs(), &[0.05, 0.95]);
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = SchedulerConfig::mastering_rate();
        cfg.mr_params.delta = 1.5;
        assert!(matches!(
            Scheduler::seeded(two_tasks(), cfg, 0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn one_hot_distribution_always_samples_its_task() {
        // chain A -> B with nothing learned: amax on MR puts all mass on A
        let dag = CurriculumDag::chain(&["A", "B"]).unwrap();
        let cfg = SchedulerConfig {
            converter: Converter::Amax,
            ..SchedulerConfig::mastering_rate()
        };
        let mut s = Scheduler::seeded(dag, cfg, 3).unwrap();
        for _ in 0..200 {
            let out = s.step(&mut Fixed(0.0)).unwrap();
            assert_eq!(out.distribution.probs(), &[1.0, 0.0]);
            assert_eq!(out.sampled, [TaskId(0)]);
        }
    }

    #[test]
    fn parallel_with_one_actor_matches_sequential() {
        let dag = crate::simlearner::BuiltinCurriculum::Chain3.curriculum();
        let (_, lr) = seed_streams(9);
        let mut la = SyntheticLearner::new(&dag, SynthLearnerParams::default(), lr.clone());
        let mut lb = SyntheticLearner::new(&dag, SynthLearnerParams::default(), lr);
        let mut a = Scheduler::seeded(dag.clone(), SchedulerConfig::mastering_rate(), 9).unwrap();
        let mut b = Scheduler::seeded(dag, SchedulerConfig::mastering_rate(), 9).unwrap();
        for _ in 0..500 {
            assert_eq!(a.step(&mut la).unwrap(), b.step_parallel(&mut lb, 1).unwrap());
        }
    }

    #[test]
    fn parallel_outcome_lengths_and_replay() {
        let mut s = Scheduler::seeded(two_tasks(), SchedulerConfig::gprop_linreg(), 1).unwrap();
        let mut replay = Scheduler::seeded(two_tasks(), SchedulerConfig::gprop_linreg(), 1).unwrap();
        let dag = two_tasks();
        let mut learner = SyntheticLearner::seeded(&dag, SynthLearnerParams::default(), 4);
        let mut t = 0;
        for _ in 0..100 {
            let out = s.step_parallel(&mut learner, 4).unwrap();
            assert_eq!(out.sampled.len(), 4);
            assert_eq!(out.returns.len(), 4);
            for &(c, r) in &out.returns {
                t += 1;
                replay.record(c, t, r).unwrap();
            }
            assert_eq!(s.mastery(), replay.mastery());
        }
    }

    #[test]
    fn batch_records_every_task() {
        let dag = CurriculumDag::edgeless(["A", "B", "C"].into_iter().map(TaskSpec::named).collect()).unwrap();
        let mut s = Scheduler::seeded(dag, SchedulerConfig::gprop_linreg(), 2).unwrap();
        for step in 1..=20 {
            let out = s.step_batch(&mut Fixed(0.2), 16).unwrap();
            assert_eq!(out.sampled.len(), 16);
            assert_eq!(out.returns.len(), 3);
            for c in 0..3 {
                assert_eq!(s.history().len(TaskId(c)), step.min(10));
            }
        }
    }

    #[test]
    fn batch_one_hot_draws_single_task() {
        let dag = CurriculumDag::chain(&["A", "B", "C"]).unwrap();
        let cfg = SchedulerConfig {
            converter: Converter::Amax,
            ..SchedulerConfig::mastering_rate()
        };
        let mut s = Scheduler::seeded(dag, cfg, 2).unwrap();
        let out = s.step_batch(&mut Fixed(0.0), 32).unwrap();
        assert!(out.sampled.iter().all(|&c| c == TaskId(0)));
        assert_eq!(out.returns.len(), 3);
    }

    #[test]
    fn zero_actors_rejected() {
        let mut s = Scheduler::seeded(two_tasks(), SchedulerConfig::gprop_linreg(), 0).unwrap();
        assert!(s.step_parallel(&mut Fixed(0.0), 0).is_err());
        assert!(s.step_batch(&mut Fixed(0.0), 0).is_err());
    }

    #[test]
    fn learner_errors_propagate() {
        struct Broken;
        impl Learner for Broken {
            fn train(&mut self, _: TaskId) -> Result<f64> {
                Err(Error::Learner("boom".into()))
            }
        }
        let mut s = Scheduler::seeded(two_tasks(), SchedulerConfig::gprop_linreg(), 0).unwrap();
        assert!(matches!(s.step(&mut Broken), Err(Error::Learner(_))));
    }
}
