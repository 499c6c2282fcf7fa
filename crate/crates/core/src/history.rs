//! Per-task return windows and the learning-progress statistics computed
//! from them.

use std::collections::VecDeque;

use crate::curriculum::{CurriculumDag, TaskId};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_EWMA_ALPHA: f64 = 0.1;

/// The `K` most recent `(timestep, return)` pairs of every task, plus the
/// exponentially smoothed slope used by the Window estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnHistory {
    window: usize,
    alpha: f64,
    samples: Vec<VecDeque<(u64, f64)>>,
    smoothed: Vec<f64>,
    /// Mean reported for a task that has no samples yet.
    initial_means: Vec<f64>,
}

impl ReturnHistory {
    pub fn new(tasks: usize, window: usize) -> Self {
        Self::with_initial_means(vec![0.0; tasks], window)
    }

    /// History whose empty-window mean is each task's minimum estimate.
    pub fn for_curriculum(dag: &CurriculumDag, window: usize) -> Self {
        Self::with_initial_means(dag.tasks().iter().map(|t| t.min_est).collect(), window)
    }

    pub fn with_initial_means(initial_means: Vec<f64>, window: usize) -> Self {
        assert!(window >= 1, "window size must be at least 1");
        let n = initial_means.len();
        Self {
            window,
            alpha: DEFAULT_EWMA_ALPHA,
            samples: (0..n).map(|_| VecDeque::with_capacity(window)).collect(),
            smoothed: vec![0.0; n],
            initial_means,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn window_size(&self) -> usize {
        self.window
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_tasks(&self) -> usize {
        self.samples.len()
    }

    fn slot(&self, task: TaskId) -> Result<&VecDeque<(u64, f64)>> {
        self.samples.get(task.0).ok_or(Error::UnknownTask(task))
    }

    pub fn samples(&self, task: TaskId) -> Result<impl Iterator<Item = (u64, f64)> + '_> {
        Ok(self.slot(task)?.iter().copied())
    }

    pub fn len(&self, task: TaskId) -> usize {
        self.samples.get(task.0).map_or(0, VecDeque::len)
    }

    pub fn record(&mut self, task: TaskId, timestep: u64, ret: f64) -> Result<()> {
        let window = self.window;
        let slot = self.samples.get_mut(task.0).ok_or(Error::UnknownTask(task))?;
        if let Some(&(last, _)) = slot.back() {
            if timestep <= last {
                return Err(Error::NonMonotonicTimestep {
                    task,
                    last,
                    got: timestep,
                });
            }
        }
        if slot.len() == window {
            slot.pop_front();
        }
        slot.push_back((timestep, ret));
        Ok(())
    }

    /// Least-squares slope of return against timestep over the window.
    /// Zero with fewer than two samples.
    pub fn linreg_slope(&self, task: TaskId) -> f64 {
        let Some(slot) = self.samples.get(task.0) else {
            return 0.0;
        };
        if slot.len() < 2 {
            return 0.0;
        }
        let n = slot.len() as f64;
        // Center on the first timestep so large global clocks do not cost
        // precision in the squared terms.
        let t0 = slot[0].0;
        let (mut st, mut sr) = (0.0, 0.0);
        for &(t, r) in slot {
            st += (t - t0) as f64;
            sr += r;
        }
        let (tm, rm) = (st / n, sr / n);
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, r) in slot {
            let dt = (t - t0) as f64 - tm;
            num += dt * (r - rm);
            den += dt * dt;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Updates and returns the smoothed slope
    /// `alpha * linreg_slope + (1 - alpha) * previous`.
    pub fn window_beta(&mut self, task: TaskId) -> f64 {
        let slope = self.linreg_slope(task);
        let Some(beta) = self.smoothed.get_mut(task.0) else {
            return 0.0;
        };
        *beta = self.alpha * slope + (1.0 - self.alpha) * *beta;
        *beta
    }

    /// Last value produced by [`window_beta`](Self::window_beta); 0 before
    /// any update.
    pub fn smoothed_beta(&self, task: TaskId) -> f64 {
        self.smoothed.get(task.0).copied().unwrap_or(0.0)
    }

    /// Mean of the windowed returns, or the task's initial mean when no
    /// return has been recorded yet.
    pub fn running_mean(&self, task: TaskId) -> f64 {
        let Some(slot) = self.samples.get(task.0) else {
            return 0.0;
        };
        if slot.is_empty() {
            return self.initial_means[task.0];
        }
        slot.iter().map(|&(_, r)| r).sum::<f64>() / slot.len() as f64
    }
}
