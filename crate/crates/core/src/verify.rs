//! Feasibility and first-order optimality checks for candidate solutions.
//!
//! Optimality is certified by pairwise transfers: moving mass from `x_i` to
//! `x_k` changes the objective at rate `x_k/a_k − x_i/a_i`, and a feasible
//! point is optimal exactly when no transfer that stays feasible for a small
//! step has a negative rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::QrapNcInstance;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightConstraint {
    /// 0-based prefix index `j`, meaning `x_0 + … + x_j`.
    pub index: usize,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub max_bound_violation: f64,
    pub bound_index: Option<usize>,
    pub max_nested_violation: f64,
    pub nested_index: Option<usize>,
    pub resource_residual: f64,
}

impl Feasibility {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_bound_violation <= tol && self.max_nested_violation <= tol && self.resource_residual <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    /// Most negative rate over admissible transfers; `None` when no transfer
    /// is admissible.
    pub worst_rate: Option<f64>,
    /// `(from, to)` of the worst transfer, 0-based.
    pub worst_pair: Option<(usize, usize)>,
}

impl Exchange {
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_rate.is_none_or(|r| r >= -tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub feasible: bool,
    pub optimal: bool,
    pub feasibility: Feasibility,
    pub exchange: Exchange,
    pub tight: Vec<TightConstraint>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.feasible && self.optimal
    }
}

/// `VERIFY_ABS · max(1, |R|, ‖U‖∞)`.
pub fn default_tolerance(inst: &QrapNcInstance) -> f64 {
    let u_inf = inst.prefix_upper.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    tol::VERIFY_ABS * inst.resource().abs().max(u_inf).max(1.0)
}

fn check_len(inst: &QrapNcInstance, x: &[f64]) -> Result<()> {
    if x.len() != inst.len() {
        return Err(Error::invalid(format!("solution has length {}, instance has n = {}", x.len(), inst.len())));
    }
    Ok(())
}

fn prefix_sums(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        })
        .collect()
}

pub fn check_feasibility(inst: &QrapNcInstance, x: &[f64]) -> Result<Feasibility> {
    check_len(inst, x)?;
    let (l, u) = (inst.lower(), inst.upper());
    let sums = prefix_sums(x);
    let (max_bound_violation, bound_index) = worst((0..x.len()).map(|i| (l[i] - x[i]).max(x[i] - u[i])));
    let (max_nested_violation, nested_index) =
        worst((0..x.len() - 1).map(|j| (inst.prefix_lower[j] - sums[j]).max(sums[j] - inst.prefix_upper[j])));
    Ok(Feasibility {
        max_bound_violation,
        bound_index,
        max_nested_violation,
        nested_index,
        resource_residual: (sums[x.len() - 1] - inst.resource()).abs(),
    })
}

/// Largest positive violation and its first index; `(0, None)` if none.
fn worst(violations: impl Iterator<Item = f64>) -> (f64, Option<usize>) {
    let mut best = (0.0, None);
    for (i, v) in violations.enumerate() {
        if v > best.0 {
            best = (v, Some(i));
        }
    }
    best
}

/// Worst admissible pairwise transfer in O(n): for each receiver `k` the best
/// donor is the admissible `i < k` (or `i > k` in reverse) with extreme
/// `x_i / a_i`, and a tight nested bound between them blocks the pair.
pub fn check_exchange_optimality(inst: &QrapNcInstance, x: &[f64], tol: f64) -> Result<Exchange> {
    check_len(inst, x)?;
    let n = x.len();
    let (a, l, u) = (inst.weights(), inst.lower(), inst.upper());
    let sums = prefix_sums(x);
    let mut worst = Exchange { worst_rate: None, worst_pair: None };
    let mut record = |rate: f64, from: usize, to: usize| {
        if worst.worst_rate.is_none_or(|w| rate < w) {
            worst.worst_rate = Some(rate);
            worst.worst_pair = Some((from, to));
        }
    };
    // Donor before receiver: every prefix in between decreases.
    let mut donor: Option<(f64, usize)> = None;
    for k in 0..n {
        let g = x[k] / a[k];
        if x[k] < u[k] - tol {
            if let Some((gi, i)) = donor {
                record(g - gi, i, k);
            }
        }
        if x[k] > l[k] + tol && donor.is_none_or(|(gi, _)| g > gi) {
            donor = Some((g, k));
        }
        if k + 1 < n && sums[k] <= inst.prefix_lower[k] + tol {
            donor = None;
        }
    }
    // Donor after receiver: every prefix in between increases.
    let mut receiver: Option<(f64, usize)> = None;
    for k in 0..n {
        let g = x[k] / a[k];
        if x[k] > l[k] + tol {
            if let Some((gi, i)) = receiver {
                record(gi - g, k, i);
            }
        }
        if x[k] < u[k] - tol && receiver.is_none_or(|(gi, _)| g < gi) {
            receiver = Some((g, k));
        }
        if k + 1 < n && sums[k] >= inst.prefix_upper[k] - tol {
            receiver = None;
        }
    }
    Ok(worst)
}

pub fn tight_constraints(inst: &QrapNcInstance, x: &[f64], tol: f64) -> Result<Vec<TightConstraint>> {
    check_len(inst, x)?;
    let sums = prefix_sums(x);
    let mut tight = Vec::new();
    for j in 0..x.len() - 1 {
        if (sums[j] - inst.prefix_lower[j]).abs() <= tol {
            tight.push(TightConstraint { index: j, side: Side::Lower });
        }
        if (sums[j] - inst.prefix_upper[j]).abs() <= tol {
            tight.push(TightConstraint { index: j, side: Side::Upper });
        }
    }
    Ok(tight)
}

/// Number of prefixes with at least one tight side.
pub fn tight_count(tight: &[TightConstraint]) -> usize {
    let mut count = 0;
    let mut last = None;
    for t in tight {
        if last != Some(t.index) {
            count += 1;
            last = Some(t.index);
        }
    }
    count
}

/// `(max |a_i − b_i|, max |a_i − b_i| / max(|a_i|, |b_i|))`.
pub fn compare_solutions(xa: &[f64], xb: &[f64]) -> Result<(f64, f64)> {
    if xa.len() != xb.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", xa.len(), xb.len())));
    }
    let mut abs = 0.0f64;
    let mut rel = 0.0f64;
    for (p, q) in xa.iter().zip(xb) {
        let d = (p - q).abs();
        abs = abs.max(d);
        let scale = p.abs().max(q.abs());
        if d > 0.0 {
            rel = rel.max(d / scale);
        }
    }
    Ok((abs, rel))
}

/// Runs every check.
pub fn verify(inst: &QrapNcInstance, x: &[f64], tol: f64) -> Result<VerificationReport> {
    let feasibility = check_feasibility(inst, x)?;
    let exchange = check_exchange_optimality(inst, x, tol)?;
    let tight = tight_constraints(inst, x, tol)?;
    Ok(VerificationReport {
        tolerance: tol,
        feasible: feasibility.holds(tol),
        optimal: exchange.holds(tol),
        feasibility,
        exchange,
        tight,
    })
}
