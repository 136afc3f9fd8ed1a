//! Problem instances: plain QRAP and QRAP with nested prefix-sum bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fast::MultiplierTrace;
use crate::tol;

/// `min Σ ½ x_i²/a_i  s.t.  Σ x_i = R,  l ≤ x ≤ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrapInstance {
    pub weights: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resource: f64,
}

impl QrapInstance {
    pub fn new(weights: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, resource: f64) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::invalid("instance must have at least one variable"));
        }
        if lower.len() != n {
            return Err(Error::invalid(format!("l must have length n = {n}, got {}", lower.len())));
        }
        if upper.len() != n {
            return Err(Error::invalid(format!("u must have length n = {n}, got {}", upper.len())));
        }
        if !resource.is_finite() {
            return Err(Error::invalid("R is not finite"));
        }
        for i in 0..n {
            if !weights[i].is_finite() || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::invalid(format!("non-finite value at index {i}")));
            }
            if weights[i] <= 0.0 {
                return Err(Error::invalid(format!("a[{i}] not positive")));
            }
            if lower[i] > upper[i] {
                return Err(Error::invalid(format!("l[{i}] > u[{i}]")));
            }
        }
        Ok(Self { weights, lower, upper, resource })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// QRAP with `L_j ≤ Σ_{i≤j} x_i ≤ U_j` for `j < n`.
///
/// `prefix_lower` and `prefix_upper` have length `n - 1`; the bound for the
/// full prefix is the resource constraint itself.
#[derive(Debug, Clone, PartialEq)]
pub struct QrapNcInstance {
    pub qrap: QrapInstance,
    pub prefix_lower: Vec<f64>,
    pub prefix_upper: Vec<f64>,
}

/// Wire form of an instance, `{"a","l","u","L","U","R"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub a: Vec<f64>,
    pub l: Vec<f64>,
    pub u: Vec<f64>,
    #[serde(rename = "L")]
    pub big_l: Vec<f64>,
    #[serde(rename = "U")]
    pub big_u: Vec<f64>,
    #[serde(rename = "R")]
    pub r: f64,
}

impl QrapNcInstance {
    pub fn new(qrap: QrapInstance, prefix_lower: Vec<f64>, prefix_upper: Vec<f64>) -> Result<Self> {
        let n = qrap.len();
        if prefix_lower.len() + 1 != n {
            return Err(Error::invalid(format!("L must have length n-1 = {}, got {}", n - 1, prefix_lower.len())));
        }
        if prefix_upper.len() + 1 != n {
            return Err(Error::invalid(format!("U must have length n-1 = {}, got {}", n - 1, prefix_upper.len())));
        }
        for (j, (lo, hi)) in prefix_lower.iter().zip(&prefix_upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!("non-finite nested bound at index {j}")));
            }
        }
        Ok(Self { qrap, prefix_lower, prefix_upper })
    }

    /// Checks the structural invariants of raw data and builds a typed instance.
    pub fn validate(raw: &RawInstance) -> Result<Self> {
        let qrap = QrapInstance::new(raw.a.clone(), raw.l.clone(), raw.u.clone(), raw.r)?;
        Self::new(qrap, raw.big_l.clone(), raw.big_u.clone())
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            a: self.qrap.weights.clone(),
            l: self.qrap.lower.clone(),
            u: self.qrap.upper.clone(),
            big_l: self.prefix_lower.clone(),
            big_u: self.prefix_upper.clone(),
            r: self.qrap.resource,
        }
    }

    pub fn len(&self) -> usize {
        self.qrap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qrap.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.qrap.weights
    }

    pub fn lower(&self) -> &[f64] {
        &self.qrap.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.qrap.upper
    }

    pub fn resource(&self) -> f64 {
        self.qrap.resource
    }

    /// Nested lower bound of prefix `j` (0-based), with `L_n = R`.
    pub fn nested_lower(&self, j: usize) -> f64 {
        self.prefix_lower.get(j).copied().unwrap_or(self.qrap.resource)
    }

    /// Nested upper bound of prefix `j` (0-based), with `U_n = R`.
    pub fn nested_upper(&self, j: usize) -> f64 {
        self.prefix_upper.get(j).copied().unwrap_or(self.qrap.resource)
    }

    /// Magnitude used to scale absolute tolerances for this instance.
    pub fn scale(&self) -> f64 {
        let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        1f64.max(self.qrap.resource.abs()).max(inf_norm(&self.prefix_upper)).max(inf_norm(&self.prefix_lower))
    }

    /// Propagates the variable bounds into the nested bounds, front to back.
    pub fn tighten(&self) -> Result<Self> {
        let n = self.len();
        let l = self.lower();
        let u = self.upper();
        let mut lo = self.prefix_lower.clone();
        let mut hi = self.prefix_upper.clone();
        let (mut prev_lo, mut prev_hi) = (0.0, 0.0);
        for j in 0..n - 1 {
            lo[j] = if j == 0 { lo[0].max(l[0]) } else { lo[j].max(prev_lo + l[j]) };
            hi[j] = if j == 0 { hi[0].min(u[0]) } else { hi[j].min(prev_hi + u[j]) };
            if lo[j] > hi[j] && !tol::bounds_equal(lo[j], hi[j]) {
                return Err(Error::infeasible(format!(
                    "nested bounds cross at prefix {}: L = {} > U = {}",
                    j + 1,
                    lo[j],
                    hi[j]
                )));
            }
            prev_lo = lo[j];
            prev_hi = hi[j];
        }
        let r = self.resource();
        let (min_r, max_r) = (prev_lo + l[n - 1], prev_hi + u[n - 1]);
        let below = r < min_r && !tol::bounds_equal(r, min_r);
        let above = r > max_r && !tol::bounds_equal(r, max_r);
        if below || above {
            return Err(Error::infeasible(format!("R = {r} outside attainable range [{min_r}, {max_r}]")));
        }
        Ok(Self { qrap: self.qrap.clone(), prefix_lower: lo, prefix_upper: hi })
    }

    /// Prefix indices `j` (0-based, `j < n-1`) whose nested bounds coincide.
    pub fn split_points(&self) -> Vec<usize> {
        (0..self.len().saturating_sub(1))
            .filter(|&j| tol::bounds_equal(self.prefix_lower[j], self.prefix_upper[j]))
            .collect()
    }

    /// Splits a tightened instance at every prefix whose bounds coincide.
    ///
    /// Concatenating the optimal solutions of the pieces, in order, gives the
    /// optimal solution of the whole instance.
    pub fn split_on_equal_bounds(&self) -> Vec<Self> {
        let points = self.split_points();
        if points.is_empty() {
            return vec![self.clone()];
        }
        let mut pieces = Vec::with_capacity(points.len() + 1);
        let mut start = 0;
        let mut fixed = 0.0;
        let ends = points.iter().map(|&j| {
            let v = 0.5 * (self.prefix_lower[j] + self.prefix_upper[j]);
            (j, v)
        });
        for (end, value) in ends.chain(std::iter::once((self.len() - 1, self.resource()))) {
            pieces.push(self.sub_instance(start, end, fixed, value));
            start = end + 1;
            fixed = value;
        }
        pieces
    }

    /// Variables `start..=end` with the prefix before `start` fixed at `fixed`
    /// and the prefix through `end` fixed at `total`.
    pub(crate) fn sub_instance(&self, start: usize, end: usize, fixed: f64, total: f64) -> Self {
        let q = &self.qrap;
        let qrap = QrapInstance {
            weights: q.weights[start..=end].to_vec(),
            lower: q.lower[start..=end].to_vec(),
            upper: q.upper[start..=end].to_vec(),
            resource: total - fixed,
        };
        let prefix_lower = self.prefix_lower[start..end].iter().map(|v| v - fixed).collect();
        let prefix_upper = self.prefix_upper[start..end].iter().map(|v| v - fixed).collect();
        Self { qrap, prefix_lower, prefix_upper }
    }
}

/// `Σ ½ x_i² / a_i`.
pub fn objective(weights: &[f64], x: &[f64]) -> f64 {
    weights.iter().zip(x).map(|(a, x)| 0.5 * x * x / a).sum()
}

/// A primal solution together with whatever diagnostics the solver produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub trace: Option<MultiplierTrace>,
    /// Prefix indices (0-based) at which the instance was decomposed. For the
    /// infeasibility-guided solver these are the recursion split points.
    pub splits: Vec<usize>,
}

impl Solution {
    pub fn new(weights: &[f64], x: Vec<f64>) -> Self {
        let objective = objective(weights, &x);
        Self { x, objective, trace: None, splits: Vec::new() }
    }
}
