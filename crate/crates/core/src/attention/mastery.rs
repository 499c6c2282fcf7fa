//! Running mean/min/max bookkeeping and the mastering-rate family of
//! quantities derived from it.

use crate::curriculum::{CurriculumDag, GraphIndex, TaskId};
use crate::history::ReturnHistory;

#[derive(Debug, Clone, PartialEq)]
pub struct MasteryState {
    mean: Vec<f64>,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MasteryState {
    /// Initial state: running mean and running min at the minimum estimate,
    /// running max at the maximum estimate.
    pub fn new(dag: &CurriculumDag) -> Self {
        let min: Vec<f64> = dag.tasks().iter().map(|t| t.min_est).collect();
        let max = dag.tasks().iter().map(|t| t.max_est).collect();
        Self {
            mean: min.clone(),
            min,
            max,
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Refreshes task `c` from its window. Call after every recorded return.
    pub fn update(&mut self, c: TaskId, hist: &ReturnHistory) {
        let i = c.index();
        let r = hist.running_mean(c);
        self.mean[i] = r;
        self.min[i] = self.min[i].min(r);
        self.max[i] = self.max[i].max(r);
    }

    pub fn running_mean(&self, c: TaskId) -> f64 {
        self.mean[c.index()]
    }

    pub fn running_min(&self, c: TaskId) -> f64 {
        self.min[c.index()]
    }

    pub fn running_max(&self, c: TaskId) -> f64 {
        self.max[c.index()]
    }

    /// `(mean - min) / (max - min)`, in `[0, 1]`.
    pub fn mastering_rate(&self, c: TaskId) -> f64 {
        let i = c.index();
        (self.mean[i] - self.min[i]) / (self.max[i] - self.min[i])
    }

    pub fn mastering_rates(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.mastering_rate(TaskId(i))).collect()
    }

    /// Minimum mastering rate over all ancestors; 1 for tasks without any.
    pub fn learnability(&self, c: TaskId, graph: &GraphIndex) -> f64 {
        graph
            .ancestors(c)
            .iter()
            .map(|&a| self.mastering_rate(a))
            .fold(1.0, f64::min)
    }

    /// Minimum mastering rate over direct successors; 0 for sinks.
    pub fn successor_mastery(&self, c: TaskId, graph: &GraphIndex) -> f64 {
        let succ = graph.successors(c);
        if succ.is_empty() {
            return 0.0;
        }
        succ.iter()
            .map(|&s| self.mastering_rate(s))
            .fold(f64::INFINITY, f64::min)
    }
}
