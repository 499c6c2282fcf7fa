//! Cross-seed summaries of run logs: median and quartile learning curves,
//! and frames-to-mastery per task.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::runlog::{format_sig9, RunLog};
use crate::error::{Error, Result};

/// Mastering rate at which a task counts as mastered in reports.
pub const MASTERY_THRESHOLD: f64 = 0.9;

/// Linear-interpolation quantile of sorted data (position `q * (n - 1)`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMastery {
    pub seed: u64,
    /// First step with mastering rate at or above the threshold.
    pub step: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub name: String,
    pub q1: Vec<f64>,
    pub median: Vec<f64>,
    pub q3: Vec<f64>,
    pub frames_to_mastery: Vec<SeedMastery>,
    /// Seeds that never reach mastery count as infinitely late; `None` when
    /// the median falls on one of them.
    pub median_frames_to_mastery: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seeds: Vec<u64>,
    pub steps: Vec<u64>,
    pub mastery_threshold: f64,
    pub tasks: Vec<TaskSummary>,
}

impl Summary {
    pub fn task(&self, name: &str) -> Option<&TaskSummary> {
        self.tasks.iter().find(|t| t.name == name)
    }

    /// Long-format quartile table: `task,step,q1,median,q3`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,step,q1,median,q3\n");
        for t in &self.tasks {
            for (i, step) in self.steps.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    t.name,
                    step,
                    format_sig9(t.q1[i]),
                    format_sig9(t.median[i]),
                    format_sig9(t.q3[i])
                ));
            }
        }
        out
    }
}

fn first_mastered(rates: &[f64], steps: &[u64]) -> Option<u64> {
    rates.iter().position(|&m| m >= MASTERY_THRESHOLD).map(|i| steps[i])
}

/// Summarizes logs keyed by seed. All logs must share tasks and steps.
pub fn summarize(logs: &[(u64, RunLog)]) -> Result<Summary> {
    let Some((_, first)) = logs.first() else {
        return Err(Error::EmptyLogDir("<no logs>".into()));
    };
    for (seed, log) in logs {
        if log.tasks != first.tasks {
            return Err(Error::SchemaMismatch(format!("seed {seed}: task columns differ")));
        }
        if log.steps != first.steps {
            return Err(Error::SchemaMismatch(format!("seed {seed}: step column differs")));
        }
    }
    let rows = first.steps.len();
    let tasks = first
        .tasks
        .iter()
        .enumerate()
        .map(|(ti, name)| {
            let (mut q1, mut median, mut q3) = (Vec::new(), Vec::new(), Vec::new());
            let mut column = Vec::with_capacity(logs.len());
            for r in 0..rows {
                column.clear();
                column.extend(logs.iter().map(|(_, l)| l.means[ti][r]));
                column.sort_by(f64::total_cmp);
                q1.push(quantile(&column, 0.25));
                median.push(quantile(&column, 0.5));
                q3.push(quantile(&column, 0.75));
            }
            let frames: Vec<SeedMastery> = logs
                .iter()
                .map(|(seed, l)| SeedMastery {
                    seed: *seed,
                    step: first_mastered(&l.mastering[ti], &l.steps),
                })
                .collect();
            let mut reached: Vec<f64> = frames
                .iter()
                .map(|f| f.step.map_or(f64::INFINITY, |s| s as f64))
                .collect();
            reached.sort_by(f64::total_cmp);
            let mid = quantile_with_infinity(&reached);
            TaskSummary {
                name: name.clone(),
                q1,
                median,
                q3,
                frames_to_mastery: frames,
                median_frames_to_mastery: mid.is_finite().then_some(mid),
            }
        })
        .collect();
    Ok(Summary {
        seeds: logs.iter().map(|(s, _)| *s).collect(),
        steps: first.steps.clone(),
        mastery_threshold: MASTERY_THRESHOLD,
        tasks,
    })
}

// inf - inf would poison the interpolation
fn quantile_with_infinity(sorted: &[f64]) -> f64 {
    let pos = 0.5 * (sorted.len() - 1) as f64;
    if sorted[pos.ceil() as usize].is_infinite() {
        f64::INFINITY
    } else {
        quantile(sorted, 0.5)
    }
}

/// `run_<seed>.csv` files in `dir`, sorted by seed.
pub fn find_logs(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::with_path(e, dir))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(seed) = name
            .strip_prefix("run_")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            found.push((seed, path));
        }
    }
    if found.is_empty() {
        return Err(Error::EmptyLogDir(dir.display().to_string()));
    }
    found.sort();
    Ok(found)
}

fn read_logs(found: Vec<(u64, PathBuf)>) -> Result<Summary> {
    let logs = found
        .into_iter()
        .map(|(seed, path)| {
            let file = File::open(&path).map_err(|e| Error::with_path(e, &path))?;
            Ok((seed, RunLog::read(BufReader::new(file))?))
        })
        .collect::<Result<Vec<_>>>()?;
    summarize(&logs)
}

/// Summarizes every `run_<seed>.csv` in `dir`.
pub fn report(dir: &Path) -> Result<Summary> {
    read_logs(find_logs(dir)?)
}

/// Summarizes only the given seeds' logs in `dir`.
pub fn report_seeds(dir: &Path, seeds: &[u64]) -> Result<Summary> {
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    read_logs(seeds.into_iter().map(|s| (s, super::run::log_path(dir, s))).collect())
}
