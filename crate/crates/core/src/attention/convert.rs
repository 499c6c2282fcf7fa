//! Attention-to-distribution converters.

use serde::{Deserialize, Serialize};

use super::{AttentionVector, TaskDistribution};
use crate::error::Error;

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Converter {
    Amax,
    Gamax,
    Boltzmann,
    Prop,
    Gprop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverterParams {
    /// Uniform exploration share for the greedy converters.
    pub epsilon: f64,
    /// Boltzmann temperature.
    pub temperature: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

impl ConverterParams {
    pub fn validate(&self) -> Vec<Error> {
        let mut errs = Vec::new();
        if !(0.0..=1.0).contains(&self.epsilon) {
            errs.push(Error::param("epsilon", self.epsilon, "[0, 1]"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            errs.push(Error::param("temperature", self.temperature, "> 0"));
        }
        errs
    }
}

impl Converter {
    pub fn convert(self, a: &AttentionVector, params: &ConverterParams) -> TaskDistribution {
        match self {
            Converter::Amax => amax(a),
            Converter::Gamax => gamax(a, params.epsilon),
            Converter::Boltzmann => boltzmann(a, params.temperature),
            Converter::Prop => prop(a),
            Converter::Gprop => gprop(a, params.epsilon),
        }
    }
}

/// Index of the largest weight; the lowest index wins ties.
pub fn argmax(a: &AttentionVector) -> usize {
    let w = a.weights();
    let mut best = 0;
    for (i, &x) in w.iter().enumerate().skip(1) {
        if x > w[best] {
            best = i;
        }
    }
    best
}

pub fn amax(a: &AttentionVector) -> TaskDistribution {
    let mut probs = vec![0.0; a.len()];
    if !probs.is_empty() {
        probs[argmax(a)] = 1.0;
    }
    TaskDistribution::from_normalized(probs)
}

fn mix_uniform(dist: TaskDistribution, epsilon: f64) -> TaskDistribution {
    let n = dist.len() as f64;
    let probs = dist
        .into_probs()
        .into_iter()
        .map(|p| (1.0 - epsilon) * p + epsilon / n)
        .collect();
    TaskDistribution::from_normalized(probs)
}

pub fn gamax(a: &AttentionVector, epsilon: f64) -> TaskDistribution {
    mix_uniform(amax(a), epsilon)
}

pub fn boltzmann(a: &AttentionVector, temperature: f64) -> TaskDistribution {
    let w = a.weights();
    let hi = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = w.iter().map(|&x| ((x - hi) / temperature).exp()).collect();
    let z: f64 = exps.iter().sum();
    TaskDistribution::from_normalized(exps.into_iter().map(|e| e / z).collect())
}

/// `a / sum(a)`; uniform when every weight is zero.
pub fn prop(a: &AttentionVector) -> TaskDistribution {
    let total: f64 = a.weights().iter().sum();
    if total > 0.0 {
        TaskDistribution::from_normalized(a.weights().iter().map(|&x| x / total).collect())
    } else {
        TaskDistribution::uniform(a.len())
    }
}

pub fn gprop(a: &AttentionVector, epsilon: f64) -> TaskDistribution {
    mix_uniform(prop(a), epsilon)
}
