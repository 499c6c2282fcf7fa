//! Attention vectors, the mastering-rate attention program, attention
//! redistribution along the prerequisite graph, and conversion of attention
//! to sampling distributions.

pub mod convert;
pub mod mastery;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use convert::{Converter, ConverterParams};
pub use mastery::MasteryState;

use crate::curriculum::{GraphIndex, TaskId};
use crate::error::{Error, Result};

/// Non-negative weight per task.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionVector(Vec<f64>);

impl AttentionVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::param(format!("attention[{i}]"), w, ">= 0 and finite"));
        }
        Ok(Self(weights))
    }

    pub(crate) fn from_nonnegative(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        Self(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, c: TaskId) -> f64 {
        self.0[c.index()]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Sampling distribution over tasks; sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDistribution(Vec<f64>);

impl TaskDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::param("probability", f64::NAN, ">= 0"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("probability sum", total, "1 within 1e-9"));
        }
        Ok(Self(probs))
    }

    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.0
    }

    pub fn prob(&self, c: TaskId) -> f64 {
        self.0[c.index()]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse-CDF draw. Never returns a zero-probability task.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TaskId {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last_positive = i;
            if u < acc {
                return TaskId(i);
            }
        }
        TaskId(last_positive)
    }
}

pub const DEFAULT_DELTA: f64 = 0.6;
pub const DEFAULT_POWER: f64 = 6.0;
pub const DEFAULT_GAMMA_PRED: f64 = 0.2;
pub const DEFAULT_GAMMA_SUCC: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrParams {
    /// Weight of "not yet learned" against normalized learning progress.
    pub delta: f64,
    /// Exponent on the learnability rate.
    pub power: f64,
    pub gamma_pred: f64,
    pub gamma_succ: f64,
}

impl Default for MrParams {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            power: DEFAULT_POWER,
            gamma_pred: DEFAULT_GAMMA_PRED,
            gamma_succ: DEFAULT_GAMMA_SUCC,
        }
    }
}

impl MrParams {
    pub fn validate(&self) -> Vec<Error> {
        let mut errs = Vec::new();
        if !(0.0..=1.0).contains(&self.delta) {
            errs.push(Error::param("delta", self.delta, "[0, 1]"));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            errs.push(Error::param("power", self.power, "> 0"));
        }
        if !(0.0..1.0).contains(&self.gamma_pred) {
            errs.push(Error::param("gamma_pred", self.gamma_pred, "[0, 1)"));
        }
        if !(0.0..1.0).contains(&self.gamma_succ) {
            errs.push(Error::param("gamma_succ", self.gamma_succ, "[0, 1)"));
        }
        errs
    }
}

/// Slopes divided by the largest absolute slope; all zero when every slope
/// is zero.
pub fn normalize_slopes(slopes: &[f64]) -> Vec<f64> {
    let hi = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if hi > 0.0 {
        slopes.iter().map(|s| s / hi).collect()
    } else {
        vec![0.0; slopes.len()]
    }
}

/// Mastering-rate attention:
/// `learnability^p * [delta (1 - M_c) + (1 - delta) |slope_hat_c|] * [1 - M_succ]`.
pub fn mr_attention(state: &MasteryState, graph: &GraphIndex, slopes: &[f64], params: &MrParams) -> AttentionVector {
    let normalized = normalize_slopes(slopes);
    let weights = (0..state.len())
        .map(TaskId)
        .map(|c| {
            let learnable = state.learnability(c, graph).powf(params.power);
            let wanted =
                params.delta * (1.0 - state.mastering_rate(c)) + (1.0 - params.delta) * normalized[c.index()].abs();
            let unblocked = 1.0 - state.successor_mastery(c, graph);
            learnable * wanted * unblocked
        })
        .collect();
    AttentionVector::from_nonnegative(weights)
}

/// Each task keeps `1 - gamma` of its attention and receives, from every
/// direct successor `s`, `gamma / n_pred(s)` of that successor's
/// redistributed attention. Evaluated successors-first, which resolves the
/// recursion in one pass.
pub fn redistribute_pred(a: &AttentionVector, graph: &GraphIndex, gamma: f64) -> AttentionVector {
    let mut out = vec![0.0; a.len()];
    for &c in graph.reverse_topological() {
        let inflow: f64 = graph
            .successors(c)
            .iter()
            .map(|&s| gamma / graph.pred_count(s) as f64 * out[s.index()])
            .sum();
        out[c.index()] = (1.0 - gamma) * a.get(c) + inflow;
    }
    AttentionVector::from_nonnegative(out)
}

/// Each task keeps `1 - gamma` of its attention and receives, from every
/// direct predecessor `p`, `gamma / n_succ(p)` of `p`'s input attention.
pub fn redistribute_succ(a: &AttentionVector, graph: &GraphIndex, gamma: f64) -> AttentionVector {
    let out = (0..a.len())
        .map(TaskId)
        .map(|c| {
            let inflow: f64 = graph
                .predecessors(c)
                .iter()
                .map(|&p| gamma / graph.succ_count(p) as f64 * a.get(p))
                .sum();
            (1.0 - gamma) * a.get(c) + inflow
        })
        .collect();
    AttentionVector::from_nonnegative(out)
}

/// Both redistribution passes in order.
pub fn redistribute(a: &AttentionVector, graph: &GraphIndex, params: &MrParams) -> AttentionVector {
    let shared = redistribute_pred(a, graph, params.gamma_pred);
    redistribute_succ(&shared, graph, params.gamma_succ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::{CurriculumDag, TaskSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn att(w: &[f64]) -> AttentionVector {
        AttentionVector::new(w.to_vec()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn rejects_negative_attention() {
        assert!(AttentionVector::new(vec![0.1, -0.1]).is_err());
        assert!(AttentionVector::new(vec![f64::NAN]).is_err());
        assert!(TaskDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(TaskDistribution::new(vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn fresh_source_gets_delta() {
        let dag = CurriculumDag::edgeless(vec![TaskSpec::named("A")]).unwrap();
        let state = MasteryState::new(&dag);
        let a = mr_attention(&state, dag.graph(), &[0.0], &MrParams::default());
        assert_close(a.weights(), &[0.6], 1e-15);
    }

    #[test]
    fn zero_factors() {
        let dag = CurriculumDag::chain(&["A", "B"]).unwrap();
        let state = MasteryState::new(&dag);
        let a = mr_attention(&state, dag.graph(), &[0.3, -0.7], &MrParams::default());
        // B's only ancestor has mastering rate 0
        assert_eq!(a.get(TaskId(1)), 0.0);

        let solo = CurriculumDag::edgeless(vec![TaskSpec::new("A", 0.0, 0.5)]).unwrap();
        let mut state = MasteryState::new(&solo);
        let mut hist = crate::history::ReturnHistory::for_curriculum(&solo, 1);
        hist.record(TaskId(0), 1, 0.8).unwrap();
        state.update(TaskId(0), &hist);
        assert_eq!(state.mastering_rate(TaskId(0)), 1.0);
        let params = MrParams {
            delta: 1.0,
            ..MrParams::default()
        };
        let a = mr_attention(&state, solo.graph(), &[0.9], &params);
        assert_eq!(a.get(TaskId(0)), 0.0);
    }

    #[test]
    fn normalized_slopes_bounded() {
        assert_eq!(normalize_slopes(&[0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(normalize_slopes(&[0.5, -1.0, 0.25]), [0.5, -1.0, 0.25]);
        assert_eq!(normalize_slopes(&[0.0, 0.2]), [0.0, 1.0]);
    }

    #[test]
    fn redistribution_by_hand() {
        let sink = CurriculumDag::edgeless(vec![TaskSpec::named("A")]).unwrap();
        assert_close(
            redistribute_pred(&att(&[1.0]), sink.graph(), 0.2).weights(),
            &[0.8],
            1e-15,
        );
        assert_close(
            redistribute_succ(&att(&[1.0]), sink.graph(), 0.05).weights(),
            &[0.95],
            1e-15,
        );

        let chain = CurriculumDag::chain(&["A", "B"]).unwrap();
        let g = chain.graph();
        assert_close(
            redistribute_pred(&att(&[1.0, 1.0]), g, 0.2).weights(),
            &[0.96, 0.8],
            1e-15,
        );
        assert_close(
            redistribute_succ(&att(&[0.48, 0.0]), g, 0.05).weights(),
            &[0.456, 0.024],
            1e-15,
        );
        let a = att(&[0.3, 0.9]);
        assert_eq!(redistribute_succ(&a, g, 0.0), a);
    }

    /// Iterates the pred-redistribution equation as a map until it stops
    /// moving; the unknowns appear on both sides.
    fn pred_fixed_point(a: &[f64], dag: &CurriculumDag, gamma: f64) -> Vec<f64> {
        let g = dag.graph();
        let mut cur = a.to_vec();
        loop {
            let next: Vec<f64> = (0..a.len())
                .map(|c| {
                    let inflow: f64 = g
                        .successors(TaskId(c))
                        .iter()
                        .map(|s| gamma / g.pred_count(*s) as f64 * cur[s.0])
                        .sum();
                    (1.0 - gamma) * a[c] + inflow
                })
                .collect();
            let change = next.iter().zip(&cur).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            cur = next;
            if change < 1e-13 {
                return cur;
            }
        }
    }

    fn random_dag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> CurriculumDag {
        // random labels over a random upper-triangular edge set
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((TaskId(perm[i]), TaskId(perm[j])));
                }
            }
        }
        let tasks = (0..n).map(|i| TaskSpec::named(format!("t{i}"))).collect();
        CurriculumDag::new(tasks, edges).unwrap()
    }

    #[test]
    fn pred_redistribution_matches_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let dag = random_dag(&mut rng, 15, 0.25);
            let a: Vec<f64> = (0..15).map(|_| rng.gen()).collect();
            let got = redistribute_pred(&att(&a), dag.graph(), 0.2);
            assert_close(got.weights(), &pred_fixed_point(&a, &dag, 0.2), 1e-12);
        }
    }

    proptest! {
        #[test]
        fn attention_nonnegative_on_random_states(
            seed in any::<u64>(),
            delta in 0.0f64..=1.0,
            power in 0.1f64..10.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dag = random_dag(&mut rng, 8, 0.3);
            let mut state = MasteryState::new(&dag);
            let mut hist = crate::history::ReturnHistory::for_curriculum(&dag, 3);
            for t in 1..40u64 {
                let c = TaskId(rng.gen_range(0..8));
                hist.record(c, t, rng.gen_range(-0.5..1.5)).unwrap();
                state.update(c, &hist);
            }
            let slopes: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let hat = normalize_slopes(&slopes);
            prop_assert!(hat.iter().all(|s| s.abs() <= 1.0));
            prop_assert!(hat.iter().any(|s| s.abs() == 1.0));
            let params = MrParams { delta, power, ..MrParams::default() };
            let a = mr_attention(&state, dag.graph(), &slopes, &params);
            prop_assert!(a.weights().iter().all(|w| *w >= 0.0));
            let r = redistribute(&a, dag.graph(), &params);
            prop_assert!(r.weights().iter().all(|w| *w >= 0.0));
        }
    }

    #[test]
    fn sampling_skips_zero_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = TaskDistribution::new(vec![1.0, 0.0]).unwrap();
        assert!((0..1000).all(|_| d.sample(&mut rng) == TaskId(0)));
        let d = TaskDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!((0..1000).all(|_| d.sample(&mut rng) == TaskId(2)));
    }
}
