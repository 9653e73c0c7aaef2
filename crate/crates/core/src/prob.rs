//! Finite probability spaces, random variables and densities.
//!
//! States with zero mass are rejected at construction, so almost-sure
//! equality is plain vector equality and the essential supremum is the
//! maximum entry.

use crate::error::{Error, Result};

/// Tolerance on `Σ p_i = 1` when a space is constructed.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Tolerance on `Σ p_i q_i = 1` for a density.
pub const DENSITY_NORM_TOL: f64 = 1e-9;

/// A finite state space with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSpace {
    probs: Vec<f64>,
}

impl ProbSpace {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbability("state space is empty".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "state {i} has non-positive or non-finite mass {p}"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidProbability(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { probs })
    }

    /// `n` equally likely states.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProbability("state space is empty".into()));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }

    /// `Σ p_i x_i`.
    pub fn expect(&self, x: &Rv) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.dot(x.values()))
    }

    /// `Σ p_i q_i x_i`, the expectation of `x` under the measure with density `q`.
    pub fn expect_under(&self, q: &Density, x: &Rv) -> Result<f64> {
        self.check_dim(q.len())?;
        self.check_dim(x.len())?;
        Ok(self
            .probs
            .iter()
            .zip(q.values())
            .zip(x.values())
            .map(|((p, q), x)| p * (q * x))
            .sum())
    }

    pub(crate) fn dot(&self, v: &[f64]) -> f64 {
        self.probs.iter().zip(v).map(|(p, v)| p * v).sum()
    }

    /// Kullback–Leibler divergence of the measure with density `q` from this
    /// space's measure, with `0·log 0 = 0`.
    pub fn kl_divergence(&self, q: &Density) -> Result<f64> {
        self.check_dim(q.len())?;
        let kl: f64 = self
            .probs
            .iter()
            .zip(q.values())
            .map(|(&p, &q)| if q > 0.0 { p * q * q.ln() } else { 0.0 })
            .sum();
        // Gibbs' inequality; rounding can push an exact zero slightly negative.
        Ok(kl.max(0.0))
    }

    /// The all-ones density.
    pub fn base_density(&self) -> Density {
        Density {
            q: vec![1.0; self.len()],
        }
    }
}

/// A bounded random variable on a finite space. Positive values are losses.
#[derive(Debug, Clone, PartialEq)]
pub struct Rv {
    values: Vec<f64>,
}

impl Rv {
    pub fn new(space: &ProbSpace, values: Vec<f64>) -> Result<Self> {
        space.check_dim(values.len())?;
        Self::from_values(values)
    }

    /// Builds a random variable without tying it to a space; dimensions are
    /// checked at use.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("random variable entry {i}")));
        }
        Ok(Self { values })
    }

    pub fn constant(space: &ProbSpace, c: f64) -> Self {
        Self {
            values: vec![c; space.len()],
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Maximum entry. Every state carries positive mass, so this is the
    /// essential supremum.
    pub fn essup(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Rv, b: f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    pub fn sup_distance(&self, other: &Rv) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// A Radon–Nikodým density with respect to a [`ProbSpace`]'s measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    q: Vec<f64>,
}

impl Density {
    pub fn new(space: &ProbSpace, q: Vec<f64>) -> Result<Self> {
        space.check_dim(q.len())?;
        for (i, &v) in q.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDensity(format!(
                    "entry {i} is negative or non-finite ({v})"
                )));
            }
        }
        let mass = space.dot(&q);
        if (mass - 1.0).abs() > DENSITY_NORM_TOL {
            return Err(Error::InvalidDensity(format!(
                "total mass {mass}, expected 1"
            )));
        }
        Ok(Self { q })
    }

    /// Clips negatives to zero and rescales to unit mass. Used for solver
    /// output that satisfies the constraints only up to rounding.
    pub fn normalized(space: &ProbSpace, q: Vec<f64>) -> Result<Self> {
        space.check_dim(q.len())?;
        let q: Vec<f64> = q.into_iter().map(|v| v.max(0.0)).collect();
        let mass = space.dot(&q);
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidDensity(format!(
                "cannot normalize mass {mass}"
            )));
        }
        Self::new(space, q.into_iter().map(|v| v / mass).collect())
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn max_entry(&self) -> f64 {
        self.q.iter().copied().fold(0.0, f64::max)
    }
}
