use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on `|sum - 1|` when validating probability vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability vector over a (single or product) state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbMeasure {
    probs: Vec<f64>,
}

impl ProbMeasure {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, NORMALIZATION_TOL)
    }

    pub fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::NotProbability("empty vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::NotProbability(format!("entry {p}")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::NotProbability(format!("sums to {s}")));
        }
        Ok(Self { probs })
    }

    /// Rescale nonnegative weights to unit mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if let Some(p) = weights.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::NotProbability(format!("entry {p}")));
        }
        let s: f64 = weights.iter().sum();
        if s <= 0.0 {
            return Err(Error::NotProbability("zero total mass".into()));
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / s).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `<f, self>`.
    pub fn expect(&self, f: &[f64]) -> f64 {
        self.probs.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}

impl AsRef<[f64]> for ProbMeasure {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Total variation distance, half the l1 distance.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ProbMeasure::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbMeasure::new(vec![0.5, 0.6]).is_err());
        assert!(ProbMeasure::new(vec![1.5, -0.5]).is_err());
        assert!(ProbMeasure::new(vec![]).is_err());
        assert!(ProbMeasure::normalized(vec![0.0, 0.0]).is_err());
        assert_eq!(ProbMeasure::normalized(vec![1.0, 3.0]).unwrap().probs(), &[0.25, 0.75]);
    }

    #[test]
    fn tv_distance() {
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
    }
}
