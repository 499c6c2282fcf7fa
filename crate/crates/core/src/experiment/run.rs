//! Runs an experiment over its seeds and writes one CSV log per seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Experiment, RunSection};
use super::report::{self, Summary};
use super::runlog::RunLogWriter;
use crate::error::Result;
use crate::scheduler::{seed_streams, Scheduler, SchedulerConfig, StepOutcome};
use crate::simlearner::{BuiltinCurriculum, SynthLearnerParams, SyntheticLearner};

impl Experiment {
    /// Experiment on a builtin curriculum with default estimates.
    pub fn builtin(
        curriculum: BuiltinCurriculum,
        learner: SynthLearnerParams,
        scheduler: SchedulerConfig,
        run: RunSection,
    ) -> Self {
        Self {
            curriculum: curriculum.curriculum(),
            n_max: curriculum.n_max(),
            max_returns: vec![learner.max_return; curriculum.tasks().len()],
            learner,
            scheduler,
            run,
        }
    }

    /// Runs one seed, handing every step outcome to `visit`.
    pub fn run_seed_with<F>(&self, seed: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(&StepOutcome) -> Result<()>,
    {
        let (sampler, learner_rng) = seed_streams(seed);
        let mut learner = SyntheticLearner::new(&self.curriculum, self.learner, learner_rng)
            .with_max_returns(self.max_returns.clone())
            .with_n_max(self.n_max.clone());
        let mut sched = Scheduler::new(self.curriculum.clone(), self.scheduler, sampler)?;
        for _ in 0..self.run.steps {
            let out = match self.run.batch_size {
                Some(k) => sched.step_batch(&mut learner, k)?,
                None if self.run.parallel_actors > 1 => sched.step_parallel(&mut learner, self.run.parallel_actors)?,
                None => sched.step(&mut learner)?,
            };
            visit(&out)?;
        }
        Ok(())
    }

    pub fn run_seed(&self, seed: u64) -> Result<Vec<StepOutcome>> {
        let mut outs = Vec::with_capacity(self.run.steps as usize);
        self.run_seed_with(seed, |o| {
            outs.push(o.clone());
            Ok(())
        })?;
        Ok(outs)
    }

    /// Writes one seed's CSV log to `sink`.
    pub fn write_seed<W: Write>(&self, seed: u64, sink: W) -> Result<W> {
        let mut log = RunLogWriter::new(&self.curriculum, sink)?;
        self.run_seed_with(seed, |o| log.write(o))?;
        log.finish()
    }
}

pub fn log_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("run_{seed}.csv"))
}

/// Runs all seeds concurrently, writing `run_<seed>.csv` and `summary.json`
/// into `dir`.
pub fn run_to_dir(exp: &Experiment, dir: &Path) -> Result<Summary> {
    std::fs::create_dir_all(dir)?;
    exp.run.seeds.par_iter().try_for_each(|&seed| -> Result<()> {
        let file = BufWriter::new(File::create(log_path(dir, seed))?);
        exp.write_seed(seed, file)?.flush()?;
        Ok(())
    })?;
    let summary = report::report_seeds(dir, &exp.run.seeds)?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    std::fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}
