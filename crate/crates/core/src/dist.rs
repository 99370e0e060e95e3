//! Probability distributions on finite alphabets.
//!
//! A [`Distribution`] is a point of the simplex over the index set
//! `0..n`. Constructors validate nonnegativity and normalization up to
//! [`EPS_STOCH`](crate::EPS_STOCH) and then renormalize exactly, so
//! downstream arithmetic always sees weights that sum to 1 up to a single
//! rounding step.

use crate::error::{Error, Result};
use crate::EPS_STOCH;

/// Sums within this of 1 are taken as exact: renormalizing would only churn
/// the last bits, and skipping it makes validation a bitwise fixed point, so
/// canonical writes round-trip byte-identically.
pub(crate) const EXACT_SUM_TOL: f64 = 1e-13;

/// Divides by the exact sum, unless the sum is already 1 to within
/// float-accumulation noise.
pub(crate) fn renormalize(weights: Vec<f64>) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() <= EXACT_SUM_TOL {
        return weights;
    }
    weights.into_iter().map(|w| w / sum + 0.0).collect()
}

/// A probability distribution on the alphabet `0..len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates `weights` as a distribution and renormalizes exactly.
    ///
    /// Accepts entries in `[-EPS_STOCH, 1 + EPS_STOCH]` (clamped to `[0, 1]`)
    /// whose sum is within `EPS_STOCH` of 1.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DimensionMismatch(
                "distribution must have at least one outcome".into(),
            ));
        }
        let mut deviation = 0.0f64;
        for &w in &weights {
            if !w.is_finite() {
                return Err(Error::NonStochastic {
                    row: 0,
                    deviation: f64::INFINITY,
                });
            }
            if w < 0.0 {
                deviation = deviation.max(-w);
            } else if w > 1.0 {
                deviation = deviation.max(w - 1.0);
            }
        }
        let clamped: Vec<f64> = weights.iter().map(|&w| w.clamp(0.0, 1.0)).collect();
        let sum: f64 = clamped.iter().sum();
        deviation = deviation.max((sum - 1.0).abs());
        if deviation > EPS_STOCH {
            return Err(Error::NonStochastic { row: 0, deviation });
        }
        Ok(Self {
            weights: renormalize(clamped),
        })
    }

    /// Builds a distribution by dividing nonnegative weights by their sum.
    ///
    /// Used internally for quantities that are normalized by construction
    /// (posteriors, convex combinations) where only rounding noise needs to
    /// be swept out. The sum must be strictly positive.
    pub(crate) fn normalized(weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        debug_assert!(sum > 0.0, "normalizing a zero-mass weight vector");
        let weights = weights.into_iter().map(|w| w / sum + 0.0).collect();
        Self { weights }
    }

    /// The uniform distribution on `0..n`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// The point mass at `x` on `0..n`.
    pub fn point_mass(n: usize, x: usize) -> Self {
        assert!(x < n, "point mass outside the alphabet");
        let mut weights = vec![0.0; n];
        weights[x] = 1.0;
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Probability of outcome `x`.
    pub fn get(&self, x: usize) -> f64 {
        self.weights[x]
    }

    /// Shannon entropy in nats, with the convention `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        self.weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| -w * w.ln())
            .sum()
    }

    /// L1 distance `sum_x |p(x) - q(x)|`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Total variation distance, half the L1 distance.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        0.5 * self.l1_distance(other)
    }

    /// Push-forward along `map: 0..len() -> 0..target`, summing mass over
    /// preimages.
    pub fn push_forward(&self, map: &[usize], target: usize) -> Result<Self> {
        if map.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "push-forward map covers {} outcomes, distribution has {}",
                map.len(),
                self.len()
            )));
        }
        let mut weights = vec![0.0; target];
        for (x, &fx) in map.iter().enumerate() {
            if fx >= target {
                return Err(Error::DimensionMismatch(format!(
                    "push-forward map sends {x} to {fx}, outside 0..{target}"
                )));
            }
            weights[fx] += self.weights[x];
        }
        Ok(Self { weights })
    }

    /// Product distribution on the pair alphabet, pairs flattened row-major:
    /// `(x1, x2) -> x1 * other.len() + x2`.
    pub fn product(&self, other: &Self) -> Self {
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for &a in &self.weights {
            for &b in &other.weights {
                weights.push(a * b);
            }
        }
        Self { weights }
    }
}
