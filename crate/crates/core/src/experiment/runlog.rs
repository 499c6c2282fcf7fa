//! Per-seed CSV run logs.
//!
//! Schema: `step,task,return` followed by `p_<name>,mr_<name>,mean_<name>`
//! for every task in curriculum order. When a step records several returns
//! the `task` and `return` fields hold `;`-separated lists in recording
//! order.

use std::io::{Read, Write};

use crate::curriculum::CurriculumDag;
use crate::error::{Error, Result};
use crate::scheduler::StepOutcome;

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// trimmed, exponent notation outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent formatting");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn header(dag: &CurriculumDag) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "task".to_string(), "return".to_string()];
    for t in dag.tasks() {
        cols.push(format!("p_{}", t.name));
        cols.push(format!("mr_{}", t.name));
        cols.push(format!("mean_{}", t.name));
    }
    cols
}

pub fn row(dag: &CurriculumDag, out: &StepOutcome) -> Vec<String> {
    let tasks = out
        .returns
        .iter()
        .map(|(c, _)| dag.name(*c))
        .collect::<Vec<_>>()
        .join(";");
    let rets = out
        .returns
        .iter()
        .map(|(_, r)| format_sig9(*r))
        .collect::<Vec<_>>()
        .join(";");
    let probs = probability_fields(out.distribution.probs());
    let mut fields = vec![out.timestep.to_string(), tasks, rets];
    for (c, p) in dag.task_ids().zip(probs) {
        fields.push(p);
        fields.push(format_sig9(out.mastering_rates[c.index()]));
        fields.push(format_sig9(out.running_means[c.index()]));
    }
    fields
}

/// Rounds probabilities to nine significant digits, letting the largest
/// absorb the rounding residue of the others so the printed row still sums
/// to 1 within 1e-9.
pub fn probability_fields(probs: &[f64]) -> Vec<String> {
    let Some(top) = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b]).then(b.cmp(&a))) else {
        return Vec::new();
    };
    let mut fields: Vec<String> = probs.iter().map(|&p| format_sig9(p)).collect();
    let rest: f64 = fields
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top)
        .map(|(_, f)| f.parse::<f64>().expect("formatted float"))
        .sum();
    fields[top] = format_sig9((1.0 - rest).max(0.0));
    fields
}

/// Streams step outcomes to CSV.
pub struct RunLogWriter<'a, W: Write> {
    dag: &'a CurriculumDag,
    inner: csv::Writer<W>,
}

impl<'a, W: Write> RunLogWriter<'a, W> {
    pub fn new(dag: &'a CurriculumDag, sink: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        inner.write_record(header(dag))?;
        Ok(Self { dag, inner })
    }

    pub fn write(&mut self, out: &StepOutcome) -> Result<()> {
        self.inner.write_record(row(self.dag, out))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

/// Per-task columns of one parsed run log.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub tasks: Vec<String>,
    pub steps: Vec<u64>,
    /// `probs[task][row]`
    pub probs: Vec<Vec<f64>>,
    pub mastering: Vec<Vec<f64>>,
    pub means: Vec<Vec<f64>>,
}

impl RunLog {
    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(source);
        let head = reader.headers()?.clone();
        let cols: Vec<&str> = head.iter().collect();
        if cols.len() < 3 || cols[..3] != ["step", "task", "return"] || !(cols.len() - 3).is_multiple_of(3) {
            return Err(Error::SchemaMismatch(format!("unexpected header {cols:?}")));
        }
        let mut tasks = Vec::new();
        for chunk in cols[3..].chunks(3) {
            let name = chunk[0]
                .strip_prefix("p_")
                .ok_or_else(|| Error::SchemaMismatch(format!("expected p_<name>, got {}", chunk[0])))?;
            if chunk[1] != format!("mr_{name}") || chunk[2] != format!("mean_{name}") {
                return Err(Error::SchemaMismatch(format!("columns for task {name} out of order")));
            }
            tasks.push(name.to_string());
        }
        let n = tasks.len();
        let mut log = RunLog {
            tasks,
            steps: Vec::new(),
            probs: vec![Vec::new(); n],
            mastering: vec![Vec::new(); n],
            means: vec![Vec::new(); n],
        };
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::SchemaMismatch(format!("not a number: {s:?}")))
        };
        for rec in reader.records() {
            let rec = rec?;
            if rec.len() != cols.len() {
                return Err(Error::SchemaMismatch(format!(
                    "row has {} fields, header {}",
                    rec.len(),
                    cols.len()
                )));
            }
            let step = rec[0]
                .parse()
                .map_err(|_| Error::SchemaMismatch(format!("bad step {:?}", &rec[0])))?;
            log.steps.push(step);
            for i in 0..n {
                log.probs[i].push(num(&rec[3 + 3 * i])?);
                log.mastering[i].push(num(&rec[4 + 3 * i])?);
                log.means[i].push(num(&rec[5 + 3 * i])?);
            }
        }
        Ok(log)
    }
}
