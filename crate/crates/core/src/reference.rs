//! Reference solvers: the quadratic-time sequential method and the
//! infeasibility-guided divide and conquer baseline.

use crate::error::Result;
use crate::instance::{QrapInstance, QrapNcInstance, Solution};
use crate::qrap::{solve_qrap, Direction};
use crate::tol;

/// Bounds and multipliers of one step of the sequential method.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqStep {
    /// `x^j(L_j)` over the first `j` variables (0-based step `j`).
    pub at_lower: Vec<f64>,
    /// `x^j(U_j)`.
    pub at_upper: Vec<f64>,
    pub kappa: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeqBasicRun {
    pub solution: Solution,
    /// One entry per prefix `j < n`.
    pub steps: Vec<SeqStep>,
}

pub fn solve_seq_basic(inst: &QrapNcInstance) -> Result<Solution> {
    seq_basic(inst, false).map(|run| run.solution)
}

/// As [`solve_seq_basic`], keeping every intermediate bound vector.
pub fn seq_basic_steps(inst: &QrapNcInstance) -> Result<SeqBasicRun> {
    seq_basic(inst, true)
}

fn seq_basic(inst: &QrapNcInstance, keep: bool) -> Result<SeqBasicRun> {
    let inst = inst.tighten()?;
    let n = inst.len();
    let (a, l, u) = (inst.weights(), inst.lower(), inst.upper());
    let mut steps = Vec::new();
    // Bounds for the variables before the current step.
    let mut lo: Vec<f64> = Vec::with_capacity(n);
    let mut hi: Vec<f64> = Vec::with_capacity(n);
    for j in 0..n {
        let mut sub = QrapInstance {
            weights: a[..=j].to_vec(),
            lower: lo.iter().copied().chain([l[j]]).collect(),
            upper: hi.iter().copied().chain([u[j]]).collect(),
            resource: 0.0,
        };
        if j == n - 1 {
            sub.resource = inst.resource();
            let x = solve_qrap(&sub, Direction::NonDecreasing)?.x;
            return Ok(SeqBasicRun { solution: Solution::new(a, x), steps });
        }
        sub.resource = inst.prefix_lower[j];
        let at_lower = solve_qrap(&sub, Direction::NonDecreasing)?;
        sub.resource = inst.prefix_upper[j];
        let at_upper = solve_qrap(&sub, Direction::NonIncreasing)?;
        // Rounding can leave the upper solution a hair below the lower one.
        lo = at_lower.x.clone();
        hi = at_upper.x.iter().zip(&lo).map(|(h, l)| h.max(*l)).collect();
        if keep {
            steps.push(SeqStep {
                at_lower: at_lower.x,
                at_upper: at_upper.x,
                kappa: at_lower.multiplier,
                lambda: at_upper.multiplier,
            });
        }
    }
    unreachable!("loop returns at the last variable")
}

/// Solves the plain relaxation, fixes the most violated nested constraint at
/// its bound and recurses on both sides.
pub fn solve_inf(inst: &QrapNcInstance) -> Result<Solution> {
    let inst = inst.tighten()?;
    let n = inst.len();
    let (a, l, u) = (inst.weights(), inst.lower(), inst.upper());
    let mut x = vec![0.0; n];
    let mut splits = Vec::new();
    // (first, last, resource, prefix sum before `first`)
    let mut stack = vec![(0usize, n - 1, inst.resource(), 0.0f64)];
    while let Some((s, t, c, base)) = stack.pop() {
        let sub = QrapInstance {
            weights: a[s..=t].to_vec(),
            lower: l[s..=t].to_vec(),
            upper: u[s..=t].to_vec(),
            resource: c,
        };
        let y = solve_qrap(&sub, Direction::NonDecreasing)?.x;
        let mut worst: Option<(usize, f64, f64)> = None;
        let mut sum = base;
        for j in s..t {
            sum += y[j - s];
            let (lower, upper) = (inst.prefix_lower[j], inst.prefix_upper[j]);
            let (below, above) = (lower - sum, sum - upper);
            let (violation, bound) = if below >= above { (below, lower) } else { (above, upper) };
            let slack = tol::FEAS_REL * lower.abs().max(upper.abs()).max(1.0);
            if violation > slack && worst.is_none_or(|w| violation > w.1) {
                worst = Some((j, violation, bound));
            }
        }
        match worst {
            None => x[s..=t].copy_from_slice(&y),
            Some((j, _, bound)) => {
                splits.push(j);
                stack.push((j + 1, t, c - (bound - base), bound));
                stack.push((s, j, bound - base, base));
            }
        }
    }
    splits.sort_unstable();
    let mut solution = Solution::new(a, x);
    solution.splits = splits;
    Ok(solution)
}
