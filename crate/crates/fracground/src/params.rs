//! Problem parameters and derived critical exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension, fractional order and nonlinearity exponent, with the derived
/// critical exponents `p_crit = (N+2s)/(N-2s)` and `2*_s = 2N/(N-2s)`
/// (both infinite when `N <= 2s`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub dim: usize,
    pub s: f64,
    pub p: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, s: f64, p: f64) -> Result<Self> {
        if dim < 1 || dim > 3 {
            return Err(Error::BadDimension(dim));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::BadFractionalOrder(s));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::BadExponent(p));
        }
        Ok(ProblemParams { dim, s, p })
    }

    /// `(N + 2s) / (N - 2s)`, or infinity when `N <= 2s`.
    pub fn p_crit(&self) -> f64 {
        let n = self.dim as f64;
        if n > 2.0 * self.s {
            (n + 2.0 * self.s) / (n - 2.0 * self.s)
        } else {
            f64::INFINITY
        }
    }

    /// Critical Sobolev exponent `2N / (N - 2s)`, or infinity when `N <= 2s`.
    pub fn two_star_s(&self) -> f64 {
        let n = self.dim as f64;
        if n > 2.0 * self.s {
            2.0 * n / (n - 2.0 * self.s)
        } else {
            f64::INFINITY
        }
    }

    pub fn subcritical(&self) -> bool {
        self.p < self.p_crit()
    }
}
