//! Curricula, prerequisite graphs and min-max return estimates.
//!
//! A [`CurriculumDag`] is a set of named tasks, each carrying an estimate of
//! the lowest and highest mean return a learner can reach on it, plus a set
//! of "learn this first" edges. An edgeless instance is a plain curriculum.
//! The [`GraphIndex`] built alongside it precomputes every graph query the
//! schedulers need per step.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default minimum mean-return estimate when a config omits it.
pub const DEFAULT_MIN_ESTIMATE: f64 = 0.0;
/// Default maximum mean-return estimate when a config omits it.
pub const DEFAULT_MAX_ESTIMATE: f64 = 0.5;

/// Dense task index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub usize);

impl TaskId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub min_est: f64,
    pub max_est: f64,
}

impl TaskSpec {
    pub fn new(name: impl Into<String>, min_est: f64, max_est: f64) -> Self {
        Self {
            name: name.into(),
            min_est,
            max_est,
        }
    }

    /// Task with the default estimates (0, 0.5).
    pub fn named(name: impl Into<String>) -> Self {
        Self::new(name, DEFAULT_MIN_ESTIMATE, DEFAULT_MAX_ESTIMATE)
    }
}

/// Precomputed adjacency, ancestry and ordering for a validated DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphIndex {
    predecessors: Vec<Vec<TaskId>>,
    successors: Vec<Vec<TaskId>>,
    ancestors: Vec<Vec<TaskId>>,
    reverse_topo: Vec<TaskId>,
}

impl GraphIndex {
    fn build(n: usize, edges: &[(TaskId, TaskId)], names: &[String]) -> Result<Self> {
        let mut predecessors = vec![Vec::new(); n];
        let mut successors = vec![Vec::new(); n];
        for &(p, s) in edges {
            successors[p.0].push(s);
            predecessors[s.0].push(p);
        }
        for list in predecessors.iter_mut().chain(successors.iter_mut()) {
            list.sort();
        }

        // Kahn's algorithm; ties broken by lowest index so the order is stable.
        let mut indegree: Vec<usize> = predecessors.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            topo.push(TaskId(i));
            for s in &successors[i] {
                indegree[s.0] -= 1;
                if indegree[s.0] == 0 {
                    ready.insert(s.0);
                }
            }
        }
        if topo.len() < n {
            let cycle = find_cycle(&predecessors, &indegree)
                .into_iter()
                .map(|t| names[t.0].clone())
                .collect();
            return Err(Error::CycleDetected { cycle });
        }

        let mut ancestors: Vec<Vec<TaskId>> = vec![Vec::new(); n];
        for &c in &topo {
            let mut set = BTreeSet::new();
            for &p in &predecessors[c.0] {
                set.insert(p);
                set.extend(ancestors[p.0].iter().copied());
            }
            ancestors[c.0] = set.into_iter().collect();
        }

        topo.reverse();
        Ok(Self {
            predecessors,
            successors,
            ancestors,
            reverse_topo: topo,
        })
    }

    pub fn len(&self) -> usize {
        self.predecessors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predecessors.is_empty()
    }

    pub fn predecessors(&self, c: TaskId) -> &[TaskId] {
        &self.predecessors[c.0]
    }

    pub fn successors(&self, c: TaskId) -> &[TaskId] {
        &self.successors[c.0]
    }

    /// Transitive ancestors, sorted by id.
    pub fn ancestors(&self, c: TaskId) -> &[TaskId] {
        &self.ancestors[c.0]
    }

    pub fn pred_count(&self, c: TaskId) -> usize {
        self.predecessors[c.0].len()
    }

    pub fn succ_count(&self, c: TaskId) -> usize {
        self.successors[c.0].len()
    }

    /// Every task, successors listed before their predecessors.
    pub fn reverse_topological(&self) -> &[TaskId] {
        &self.reverse_topo
    }
}

/// Walks predecessor links among the tasks Kahn's algorithm could not
/// schedule. Every such task has a remaining predecessor, so the walk must
/// revisit a node; the revisited stretch is a cycle.
fn find_cycle(predecessors: &[Vec<TaskId>], indegree: &[usize]) -> Vec<TaskId> {
    let stuck = |t: TaskId| indegree[t.0] > 0;
    let start = (0..indegree.len())
        .map(TaskId)
        .find(|&t| stuck(t))
        .expect("called only when some task is unscheduled");
    let mut path = vec![start];
    let mut seen: HashMap<TaskId, usize> = HashMap::from([(start, 0)]);
    let mut cur = start;
    loop {
        let next = *predecessors[cur.0]
            .iter()
            .find(|&&p| stuck(p))
            .expect("stuck task has a stuck predecessor");
        if let Some(&pos) = seen.get(&next) {
            let mut cycle: Vec<TaskId> = path[pos..].to_vec();
            cycle.reverse();
            // close the loop for display: a -> b -> a
            cycle.push(cycle[0]);
            return cycle;
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

/// A min-max ordered curriculum.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumDag {
    tasks: Vec<TaskSpec>,
    edges: Vec<(TaskId, TaskId)>,
    graph: GraphIndex,
}

impl CurriculumDag {
    pub fn new(tasks: Vec<TaskSpec>, edges: Vec<(TaskId, TaskId)>) -> Result<Self> {
        let mut names = HashSet::new();
        for t in &tasks {
            if !names.insert(t.name.as_str()) {
                return Err(Error::DuplicateTaskName(t.name.clone()));
            }
            if !t.min_est.is_finite() || !t.max_est.is_finite() || t.min_est >= t.max_est {
                return Err(Error::InvalidMinMax {
                    task: t.name.clone(),
                    min: t.min_est,
                    max: t.max_est,
                });
            }
        }
        let n = tasks.len();
        let mut seen = HashSet::new();
        for &(p, s) in &edges {
            for end in [p, s] {
                if end.0 >= n {
                    return Err(Error::UnknownTask(end));
                }
            }
            if !seen.insert((p, s)) {
                return Err(Error::DuplicateEdge {
                    pred: tasks[p.0].name.clone(),
                    succ: tasks[s.0].name.clone(),
                });
            }
        }
        let names: Vec<String> = tasks.iter().map(|t| t.name.clone()).collect();
        let graph = GraphIndex::build(n, &edges, &names)?;
        Ok(Self { tasks, edges, graph })
    }

    /// Builds from edges given by task name.
    pub fn with_named_edges<S: AsRef<str>>(tasks: Vec<TaskSpec>, edges: &[(S, S)]) -> Result<Self> {
        let index: HashMap<&str, usize> = tasks.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .map(|&i| TaskId(i))
                .ok_or_else(|| Error::UnknownTaskName(name.to_string()))
        };
        let edges = edges
            .iter()
            .map(|(p, s)| Ok((lookup(p.as_ref())?, lookup(s.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tasks, edges)
    }

    /// Curriculum with no ordering information.
    pub fn edgeless(tasks: Vec<TaskSpec>) -> Result<Self> {
        Self::new(tasks, Vec::new())
    }

    /// Linear chain `names[0] -> names[1] -> ...` with default estimates.
    pub fn chain<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let tasks = names.iter().map(|n| TaskSpec::named(n.as_ref())).collect();
        let edges = (1..names.len()).map(|i| (TaskId(i - 1), TaskId(i))).collect();
        Self::new(tasks, edges)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn task(&self, c: TaskId) -> Result<&TaskSpec> {
        self.tasks.get(c.0).ok_or(Error::UnknownTask(c))
    }

    pub fn task_ids(&self) -> impl Iterator<Item = TaskId> {
        (0..self.tasks.len()).map(TaskId)
    }

    pub fn id_of(&self, name: &str) -> Option<TaskId> {
        self.tasks.iter().position(|t| t.name == name).map(TaskId)
    }

    pub fn name(&self, c: TaskId) -> &str {
        &self.tasks[c.0].name
    }

    pub fn edges(&self) -> &[(TaskId, TaskId)] {
        &self.edges
    }

    pub fn graph(&self) -> &GraphIndex {
        &self.graph
    }

    pub fn ancestors(&self, c: TaskId) -> Result<&[TaskId]> {
        if c.0 >= self.len() {
            return Err(Error::UnknownTask(c));
        }
        Ok(self.graph.ancestors(c))
    }
}
