//! Plain QRAP by a sweep over the sorted breakpoints of the Lagrangian
//! relaxation `x_i[δ] = clamp(a_i δ, l_i, u_i)`.

use crate::error::{Error, Result};
use crate::instance::QrapInstance;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakpointKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub value: f64,
    pub kind: BreakpointKind,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

/// Running decomposition `z[δ] = P + Q·δ` of the relaxed total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepState {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
}

impl SweepState {
    pub fn z(&self, delta: f64) -> f64 {
        self.p + self.q * delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrapSolution {
    pub x: Vec<f64>,
    pub multiplier: f64,
}

/// Minimizer of `½x²/a − δx` over `[l, u]`.
#[inline]
pub fn lagrangian_point(a: f64, l: f64, u: f64, delta: f64) -> f64 {
    if delta < l / a {
        l
    } else if delta < u / a {
        a * delta
    } else {
        u
    }
}

/// `Σ_i x_i[δ]`.
pub fn relaxed_total(inst: &QrapInstance, delta: f64) -> f64 {
    (0..inst.len()).map(|i| lagrangian_point(inst.weights[i], inst.lower[i], inst.upper[i], delta)).sum()
}

/// All `2n` breakpoints in sweep order for `direction`. Equal values put
/// lower breakpoints first on an ascending sweep and upper ones first on a
/// descending sweep, then order by index.
pub fn sorted_breakpoints(inst: &QrapInstance, direction: Direction) -> Vec<Breakpoint> {
    let n = inst.len();
    let mut bps = Vec::with_capacity(2 * n);
    for i in 0..n {
        let a = inst.weights[i];
        bps.push(Breakpoint { value: inst.lower[i] / a, kind: BreakpointKind::Lower, index: i });
        bps.push(Breakpoint { value: inst.upper[i] / a, kind: BreakpointKind::Upper, index: i });
    }
    let rank = |k: BreakpointKind| match (direction, k) {
        (Direction::NonDecreasing, BreakpointKind::Lower) | (Direction::NonIncreasing, BreakpointKind::Upper) => 0,
        _ => 1,
    };
    bps.sort_unstable_by(|x, y| {
        let by_value = match direction {
            Direction::NonDecreasing => x.value.total_cmp(&y.value),
            Direction::NonIncreasing => y.value.total_cmp(&x.value),
        };
        by_value.then(rank(x.kind).cmp(&rank(y.kind))).then(x.index.cmp(&y.index))
    });
    bps
}

/// Range of attainable totals, or an infeasibility error when `r` lies
/// outside it by more than the feasibility slack. The returned target is `r`
/// clamped into the range.
pub(crate) fn feasible_target(inst: &QrapInstance, r: f64) -> Result<f64> {
    let lo: f64 = inst.lower.iter().sum();
    let hi: f64 = inst.upper.iter().sum();
    let slack = tol::FEAS_REL * lo.abs().max(hi.abs()).max(1.0);
    if r < lo - slack || r > hi + slack {
        return Err(Error::infeasible(format!("R = {r} outside [Σl, Σu] = [{lo}, {hi}]")));
    }
    Ok(r.clamp(lo, hi))
}

pub fn solve_qrap(inst: &QrapInstance, direction: Direction) -> Result<QrapSolution> {
    let target = feasible_target(inst, inst.resource)?;
    let bps = sorted_breakpoints(inst, direction);
    let multiplier = Sweep::new(inst, &bps, direction).seek(target)?;
    let x =
        (0..inst.len()).map(|i| lagrangian_point(inst.weights[i], inst.lower[i], inst.upper[i], multiplier)).collect();
    Ok(QrapSolution { x, multiplier })
}

/// Multipliers for several resource values in one ascending sweep.
///
/// Each target is reported separately; an infeasible target does not stop
/// the sweep for the others.
pub fn solve_qrap_multi(inst: &QrapInstance, targets: &[f64]) -> Result<Vec<Result<f64>>> {
    if targets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("targets must be sorted non-decreasing"));
    }
    let bps = sorted_breakpoints(inst, Direction::NonDecreasing);
    let mut sweep = Sweep::new(inst, &bps, Direction::NonDecreasing);
    Ok(targets.iter().map(|&r| feasible_target(inst, r).and_then(|t| sweep.seek(t))).collect())
}

struct Sweep<'a> {
    inst: &'a QrapInstance,
    bps: &'a [Breakpoint],
    direction: Direction,
    next: usize,
    state: SweepState,
}

impl<'a> Sweep<'a> {
    fn new(inst: &'a QrapInstance, bps: &'a [Breakpoint], direction: Direction) -> Self {
        let p = match direction {
            Direction::NonDecreasing => inst.lower.iter().sum(),
            Direction::NonIncreasing => inst.upper.iter().sum(),
        };
        let delta = bps.first().map_or(0.0, |b| b.value);
        Self { inst, bps, direction, next: 0, state: SweepState { p, q: 0.0, delta } }
    }

    /// Advances until `target` is bracketed and returns its multiplier. The
    /// sweep can continue from there toward a later target.
    fn seek(&mut self, target: f64) -> Result<f64> {
        let ascending = self.direction == Direction::NonDecreasing;
        while let Some(bp) = self.bps.get(self.next) {
            let delta = bp.value;
            let z = self.state.z(delta);
            if tol::approx_eq(z, target) {
                self.state.delta = delta;
                return Ok(delta);
            }
            if (ascending && z > target) || (!ascending && z < target) {
                let SweepState { p, q, delta: prev } = self.state;
                if q <= 0.0 {
                    return Err(Error::internal("sweep overshoot with zero slope"));
                }
                let (lo, hi) = if ascending { (prev, delta) } else { (delta, prev) };
                let d = ((target - p) / q).clamp(lo.min(hi), hi.max(lo));
                self.state.delta = d;
                return Ok(d);
            }
            let (a, l, u) = (self.inst.weights[bp.index], self.inst.lower[bp.index], self.inst.upper[bp.index]);
            let s = &mut self.state;
            match (ascending, bp.kind) {
                (true, BreakpointKind::Lower) => (s.p, s.q) = (s.p - l, s.q + a),
                (true, BreakpointKind::Upper) => (s.p, s.q) = (s.p + u, s.q - a),
                (false, BreakpointKind::Upper) => (s.p, s.q) = (s.p - u, s.q + a),
                (false, BreakpointKind::Lower) => (s.p, s.q) = (s.p + l, s.q - a),
            }
            s.delta = delta;
            self.next += 1;
        }
        let s = self.state;
        if (s.p - target).abs() <= tol::FEAS_REL * target.abs().max(1.0) {
            Ok(s.delta)
        } else {
            Err(Error::internal(format!("breakpoints exhausted at z = {} before reaching {target}", s.p)))
        }
    }
}
