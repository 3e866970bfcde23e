use crate::error::{Error, Result};

/// Window inside which a weight vector is accepted and renormalized to exact
/// unit mass. Anything further from 1 is rejected as a user error.
pub const MASS_TOL: f64 = 1e-6;

/// Finite probability mass function over `{0, .., m-1}`.
///
/// Construction normalizes the weights exactly (divides by the sum) provided
/// the raw sum is within `MASS_TOL` of 1; weights below `-1e-12` are rejected,
/// tiny negative dust is clamped to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    weights: Vec<f64>,
}

impl Pmf {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPmf("empty support".into()));
        }
        let mut w = weights;
        for (i, v) in w.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidPmf(format!("weight[{i}] is not finite")));
            }
            if *v < -1e-12 {
                return Err(Error::InvalidPmf(format!("weight[{i}] = {v} is negative")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPmf(format!(
                "total mass {sum} is not within {MASS_TOL} of 1"
            )));
        }
        for v in w.iter_mut() {
            *v /= sum;
        }
        Ok(Pmf { weights: w })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPmf("empty support".into()));
        }
        Ok(Pmf {
            weights: vec![1.0 / m as f64; m],
        })
    }

    /// Point mass at `i`.
    pub fn delta(m: usize, i: usize) -> Result<Self> {
        if i >= m {
            return Err(Error::Domain(format!("delta point {i} outside alphabet {m}")));
        }
        let mut w = vec![0.0; m];
        w[i] = 1.0;
        Ok(Pmf { weights: w })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.weights)
    }

    /// Support (indices with strictly positive mass).
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Entropy in bits of a nonnegative weight vector (zero terms contribute 0).
pub fn entropy_bits(w: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in w {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}
