//! O(n log n) sequential solver.
//!
//! Step `j` finds the multipliers `κ_j` and `λ_j` of the prefix problems with
//! resource `L_j` and `U_j`. Their relaxed total is the previous prefix total
//! clamped to `[κ_{j-1}, λ_{j-1}]` plus `x_j[δ]`, so only breakpoints inside
//! that window survive from one step to the next. They live in four pools:
//! `A` and `B` hold the raw `α_j`, `β_j`; `K` and `L` hold collective entries
//! for earlier multipliers, each weighted by the slope frozen when it was
//! found. A backward pass turns `κ, λ` into per-variable multipliers `χ`.

use crate::depq::{Counters, DepqPool, Entry, EntryId, Tag};
use crate::error::{Error, Result};
use crate::instance::{objective, QrapNcInstance, Solution};
use crate::qrap::lagrangian_point;
use crate::tol;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiplierTrace {
    pub kappa: Vec<f64>,
    pub lambda: Vec<f64>,
    pub chi: Vec<f64>,
    pub p_lower: Vec<f64>,
    pub q_lower: Vec<f64>,
    pub p_upper: Vec<f64>,
    pub q_upper: Vec<f64>,
}

impl MultiplierTrace {
    fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self { kappa: v(), lambda: v(), chi: v(), p_lower: v(), q_lower: v(), p_upper: v(), q_upper: v() }
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }
}

/// `α_i^{j+1}` from `α_i^j`, `β_i^j` and `κ^j`.
pub fn next_lower_breakpoint(alpha: f64, beta: f64, kappa: f64) -> f64 {
    if kappa < alpha {
        alpha
    } else if kappa < beta {
        kappa
    } else {
        beta
    }
}

/// `β_i^{j+1}` from `α_i^j`, `β_i^j` and `λ^j`.
pub fn next_upper_breakpoint(alpha: f64, beta: f64, lambda: f64) -> f64 {
    if lambda > beta {
        beta
    } else if lambda > alpha {
        lambda
    } else {
        alpha
    }
}

/// Backward recursion `χ_n = κ_n`, `χ_j = κ_j` if `χ_{j+1} ≤ κ_j`, `λ_j` if
/// `χ_{j+1} ≥ λ_j`, else `χ_{j+1}`.
pub fn recover_chi(kappa: &[f64], lambda: &[f64]) -> Vec<f64> {
    let n = kappa.len();
    let mut chi = vec![0.0; n];
    if n == 0 {
        return chi;
    }
    chi[n - 1] = kappa[n - 1];
    for j in (0..n - 1).rev() {
        let next = chi[j + 1];
        chi[j] = if next <= kappa[j] {
            kappa[j]
        } else if next >= lambda[j] {
            lambda[j]
        } else {
            next
        };
    }
    chi
}

/// `x_i = l_i` if `χ_i < α_i`, `a_i χ_i` if `χ_i < β_i`, else `u_i`.
pub fn reconstruct_solution(chi: &[f64], inst: &QrapNcInstance) -> Vec<f64> {
    reconstruct(chi, inst.weights(), inst.lower(), inst.upper())
}

fn reconstruct(chi: &[f64], a: &[f64], l: &[f64], u: &[f64]) -> Vec<f64> {
    (0..chi.len()).map(|i| lagrangian_point(a[i], l[i], u[i], chi[i])).collect()
}

pub fn solve_fast(inst: &QrapNcInstance) -> Result<Solution> {
    solve_fast_counted(inst).map(|(s, _)| s)
}

/// Like [`solve_fast`], also returning the DEPQ operation counts.
pub fn solve_fast_counted(inst: &QrapNcInstance) -> Result<(Solution, Counters)> {
    let n = inst.len();
    let (a, l, u) = (inst.weights(), inst.lower(), inst.upper());
    let mut stream = FastStream::with_capacity(n);
    for j in 0..n - 1 {
        stream.push(a[j], l[j], u[j], inst.prefix_lower[j], inst.prefix_upper[j])?;
    }
    stream.finish(a[n - 1], l[n - 1], u[n - 1], inst.resource())
}

/// Contribution `(P, Q)` of one variable to `z = P + Qδ` at `p`, with both
/// breakpoints equal to `p` counted as already crossed.
#[inline]
fn contribution(a: f64, l: f64, u: f64, p: f64) -> (f64, f64) {
    if p < l / a {
        (l, 0.0)
    } else if p <= u / a {
        (0.0, a)
    } else {
        (u, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Corner {
    /// The previous multiplier is still optimal.
    Keep,
    /// Only `x_j` moves; the multiplier comes from `x_j` alone.
    Fresh(f64),
    /// A breakpoint search is needed.
    Search,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Nested { lower: f64, upper: f64 },
    Final(f64),
}

#[derive(Debug, Default)]
struct Pools {
    a: DepqPool,
    b: DepqPool,
    k: DepqPool,
    l: DepqPool,
    kappa: Option<EntryId>,
    lambda: Option<EntryId>,
}

impl Pools {
    fn clear(&mut self, total: &mut Counters) {
        for pool in [&mut self.a, &mut self.b, &mut self.k, &mut self.l] {
            total.add(&pool.counters());
            pool.clear();
        }
        self.kappa = None;
        self.lambda = None;
    }

    fn counters(&self) -> Counters {
        let mut c = Counters::default();
        for pool in [&self.a, &self.b, &self.k, &self.l] {
            c.add(&pool.counters());
        }
        c
    }

    fn pool_mut(&mut self, tag: Tag) -> &mut DepqPool {
        match tag {
            Tag::InitialLower => &mut self.a,
            Tag::InitialUpper => &mut self.b,
            Tag::MultiplierLower => &mut self.k,
            Tag::MultiplierUpper => &mut self.l,
        }
    }

    /// Smallest live value. Lower-type entries win ties so the slope never
    /// dips below its true value mid-tie.
    fn peek_min(&mut self) -> Option<Entry> {
        let mut best: Option<Entry> = None;
        for tag in [Tag::InitialLower, Tag::MultiplierLower, Tag::InitialUpper, Tag::MultiplierUpper] {
            let pool = self.pool_mut(tag);
            if pool.is_empty() {
                continue;
            }
            if let Some(e) = pool.peek_min() {
                if best.is_none_or(|b| e.value < b.value) {
                    best = Some(e);
                }
            }
        }
        best
    }

    /// Largest live value; upper-type entries win ties.
    fn peek_max(&mut self) -> Option<Entry> {
        let mut best: Option<Entry> = None;
        for tag in [Tag::InitialUpper, Tag::MultiplierUpper, Tag::InitialLower, Tag::MultiplierLower] {
            let pool = self.pool_mut(tag);
            if pool.is_empty() {
                continue;
            }
            if let Some(e) = pool.peek_max() {
                if best.is_none_or(|b| e.value > b.value) {
                    best = Some(e);
                }
            }
        }
        best
    }
}

/// Incremental solver: feed `(a_j, l_j, u_j, L_j, U_j)` for `j < n` with
/// [`push`](Self::push), then the last variable and `R` with
/// [`finish`](Self::finish). Nested bounds are tightened on arrival and the
/// instance is split wherever they coincide.
#[derive(Debug, Default)]
pub struct FastStream {
    a: Vec<f64>,
    /// Effective bounds: the first variable of each piece is restricted to
    /// its nested bounds, a single-variable piece to its resource.
    lo: Vec<f64>,
    hi: Vec<f64>,
    trace: MultiplierTrace,
    pools: Pools,
    counters: Counters,
    prefix_lower: f64,
    prefix_upper: f64,
    piece_start: usize,
    fixed: f64,
    step_lower: f64,
    step_upper: f64,
    splits: Vec<usize>,
}

impl FastStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            a: Vec::with_capacity(n),
            lo: Vec::with_capacity(n),
            hi: Vec::with_capacity(n),
            trace: MultiplierTrace::with_capacity(n),
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn push(&mut self, a: f64, l: f64, u: f64, lower: f64, upper: f64) -> Result<()> {
        let j = self.len();
        check_variable(j, a, l, u)?;
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::invalid(format!("non-finite nested bound at index {j}")));
        }
        let lower = if j == 0 { lower.max(l) } else { lower.max(self.prefix_lower + l) };
        let upper = if j == 0 { upper.min(u) } else { upper.min(self.prefix_upper + u) };
        if lower > upper && !tol::bounds_equal(lower, upper) {
            return Err(Error::infeasible(format!(
                "nested bounds cross at prefix {}: L = {lower} > U = {upper}",
                j + 1
            )));
        }
        self.prefix_lower = lower;
        self.prefix_upper = upper;
        if tol::bounds_equal(lower, upper) {
            let value = 0.5 * (lower + upper);
            self.step(a, l, u, Target::Final(value - self.fixed))?;
            self.splits.push(j);
            self.fixed = value;
            self.piece_start = j + 1;
            self.pools.clear(&mut self.counters);
        } else {
            self.step(a, l, u, Target::Nested { lower: lower - self.fixed, upper: upper - self.fixed })?;
        }
        Ok(())
    }

    pub fn finish(mut self, a: f64, l: f64, u: f64, resource: f64) -> Result<(Solution, Counters)> {
        let j = self.len();
        check_variable(j, a, l, u)?;
        if !resource.is_finite() {
            return Err(Error::invalid("R is not finite"));
        }
        let (min_r, max_r) = if j == 0 { (l, u) } else { (self.prefix_lower + l, self.prefix_upper + u) };
        if (resource < min_r && !tol::bounds_equal(resource, min_r))
            || (resource > max_r && !tol::bounds_equal(resource, max_r))
        {
            return Err(Error::infeasible(format!("R = {resource} outside attainable range [{min_r}, {max_r}]")));
        }
        self.step(a, l, u, Target::Final(resource - self.fixed))?;
        let pool_counters = self.pools.counters();
        self.counters.add(&pool_counters);

        let mut trace = self.trace;
        trace.chi = recover_chi(&trace.kappa, &trace.lambda);
        let x = reconstruct(&trace.chi, &self.a, &self.lo, &self.hi);
        let solution = Solution { objective: objective(&self.a, &x), x, trace: Some(trace), splits: self.splits };
        Ok((solution, self.counters))
    }

    fn step(&mut self, a: f64, l: f64, u: f64, target: Target) -> Result<()> {
        if self.len() == self.piece_start {
            self.first_of_piece(a, l, u, target);
            return Ok(());
        }
        let j = self.len();
        self.a.push(a);
        self.lo.push(l);
        self.hi.push(u);

        let (lower_target, upper_target) = match target {
            Target::Nested { lower, upper } => (lower, Some(upper)),
            Target::Final(c) => (c, None),
        };
        let t = &self.trace;
        let (kappa_prev, lambda_prev) = (t.kappa[j - 1], t.lambda[j - 1]);
        let (p_lower_prev, q_lower_prev) = (t.p_lower[j - 1], t.q_lower[j - 1]);
        let (p_upper_prev, q_upper_prev) = (t.p_upper[j - 1], t.q_upper[j - 1]);

        let lower_case = {
            let z = self.step_lower + lagrangian_point(a, l, u, kappa_prev);
            if tol::approx_eq(z, lower_target) {
                Corner::Keep
            } else if z > lower_target {
                Corner::Fresh(((lower_target - self.step_lower) / a).min(kappa_prev))
            } else {
                Corner::Search
            }
        };
        let upper_case = upper_target.map(|target| {
            let z = self.step_upper + lagrangian_point(a, l, u, lambda_prev);
            if tol::approx_eq(z, target) {
                Corner::Keep
            } else if z < target {
                Corner::Fresh(((target - self.step_upper) / a).max(lambda_prev))
            } else {
                Corner::Search
            }
        });

        let lo_window = match lower_case {
            Corner::Fresh(v) => v,
            Corner::Keep | Corner::Search => kappa_prev,
        };
        let hi_window = match upper_case {
            None => f64::INFINITY,
            Some(Corner::Fresh(v)) => v,
            Some(Corner::Keep | Corner::Search) => lambda_prev,
        };

        // The lower side is settled and recorded before the upper side
        // touches the pools, so any collective entry a search may cross
        // already has its weight in the trace.
        let kappa_id = self.pools.kappa.ok_or_else(|| Error::internal("no live κ entry"))?;
        let mut lower = None;
        match lower_case {
            Corner::Keep => {
                let (dp, dq) = contribution(a, l, u, kappa_prev);
                self.pools.k.set_owner(kappa_id, j)?;
                lower = Some((kappa_prev, p_lower_prev + dp, q_lower_prev + dq));
            }
            Corner::Fresh(v) => {
                let (dp, dq) = contribution(a, l, u, v);
                self.pools.kappa = Some(self.pools.k.insert(v, Tag::MultiplierLower, j));
                lower = Some((v, self.step_lower + dp, dq));
            }
            Corner::Search => {
                self.pools.k.remove(kappa_id)?;
            }
        }

        let (alpha, beta) = (l / a, u / a);
        if lo_window < alpha && alpha <= hi_window {
            self.pools.a.insert(alpha, Tag::InitialLower, j);
        }
        if lo_window <= beta && beta < hi_window {
            self.pools.b.insert(beta, Tag::InitialUpper, j);
        }

        let (kappa, p_lower, q_lower) = match lower {
            Some(found) => found,
            None => {
                let (dp, dq) = contribution(a, l, u, kappa_prev);
                let found = self.lower_search(lower_target, p_lower_prev + dp, q_lower_prev + dq, kappa_prev)?;
                self.pools.kappa = Some(self.pools.k.insert(found.0, Tag::MultiplierLower, j));
                found
            }
        };
        let t = &mut self.trace;
        t.kappa.push(kappa);
        t.p_lower.push(p_lower);
        t.q_lower.push(q_lower);

        let lambda_id = self.pools.lambda.ok_or_else(|| Error::internal("no live λ entry"))?;
        let (lambda, p_upper, q_upper) = match (upper_case, upper_target) {
            (Some(Corner::Keep), _) => {
                let (dp, dq) = contribution(a, l, u, lambda_prev);
                self.pools.l.set_owner(lambda_id, j)?;
                (lambda_prev, p_upper_prev + dp, q_upper_prev + dq)
            }
            (Some(Corner::Fresh(v)), _) => {
                let (dp, dq) = contribution(a, l, u, v);
                self.pools.lambda = Some(self.pools.l.insert(v, Tag::MultiplierUpper, j));
                (v, self.step_upper + dp, dq)
            }
            (Some(Corner::Search), Some(target)) => {
                self.pools.l.remove(lambda_id)?;
                let (dp, dq) = contribution(a, l, u, lambda_prev);
                let found = self.upper_search(target, p_upper_prev + dp, q_upper_prev + dq, lambda_prev)?;
                self.pools.lambda = Some(self.pools.l.insert(found.0, Tag::MultiplierUpper, j));
                found
            }
            _ => (kappa, p_lower, q_lower),
        };
        let t = &mut self.trace;
        t.lambda.push(lambda);
        t.p_upper.push(p_upper);
        t.q_upper.push(q_upper);
        self.step_lower = lower_target;
        self.step_upper = upper_target.unwrap_or(lower_target);
        Ok(())
    }

    fn first_of_piece(&mut self, a: f64, l: f64, u: f64, target: Target) {
        let j = self.len();
        let (lo, hi) = match target {
            Target::Nested { lower, upper } => (l.max(lower), u.min(upper).max(l.max(lower))),
            Target::Final(c) => (c, c),
        };
        self.a.push(a);
        self.lo.push(lo);
        self.hi.push(hi);
        let (kappa, lambda) = (lo / a, hi / a);
        let t = &mut self.trace;
        t.kappa.push(kappa);
        t.lambda.push(lambda);
        t.p_lower.push(0.0);
        t.q_lower.push(a);
        t.p_upper.push(0.0);
        t.q_upper.push(a);
        self.step_lower = lo;
        self.step_upper = hi;
        if let Target::Nested { .. } = target {
            self.pools.kappa = Some(self.pools.k.insert(kappa, Tag::MultiplierLower, j));
            self.pools.lambda = Some(self.pools.l.insert(lambda, Tag::MultiplierUpper, j));
        }
    }

    /// Ascending search for the multiplier at which `P + Qδ` reaches `target`.
    fn lower_search(&mut self, target: f64, mut p: f64, mut q: f64, mut prev: f64) -> Result<(f64, f64, f64)> {
        loop {
            let Some(e) = self.pools.peek_min() else {
                return exhausted(target, p, q, prev, true);
            };
            let z = p + q * e.value;
            if tol::approx_eq(z, target) {
                return Ok((e.value, p, q));
            }
            if z > target {
                let d = if q > 0.0 { ((target - p) / q).max(prev).min(e.value) } else { prev };
                return Ok((d, p, q));
            }
            self.pools.pool_mut(e.tag).pop_min();
            let (dp, dq) = self.crossing(&e);
            p -= dp;
            q += dq;
            prev = e.value;
        }
    }

    /// Descending search for the multiplier at which `P + Qδ` falls to `target`.
    fn upper_search(&mut self, target: f64, mut p: f64, mut q: f64, mut prev: f64) -> Result<(f64, f64, f64)> {
        loop {
            let Some(e) = self.pools.peek_max() else {
                return exhausted(target, p, q, prev, false);
            };
            let z = p + q * e.value;
            if tol::approx_eq(z, target) {
                return Ok((e.value, p, q));
            }
            if z < target {
                let d = if q > 0.0 { ((target - p) / q).min(prev).max(e.value) } else { prev };
                return Ok((d, p, q));
            }
            self.pools.pool_mut(e.tag).pop_max();
            let (dp, dq) = self.crossing(&e);
            p += dp;
            q -= dq;
            prev = e.value;
        }
    }

    /// Change `(−ΔP, ΔQ)` caused by crossing `e` in ascending order. A
    /// descending crossing applies the negation.
    fn crossing(&self, e: &Entry) -> (f64, f64) {
        let k = e.owner;
        match e.tag {
            Tag::InitialLower => (self.lo[k], self.a[k]),
            Tag::InitialUpper => (-self.hi[k], -self.a[k]),
            Tag::MultiplierLower => {
                let w = self.trace.q_lower[k];
                (w * e.value, w)
            }
            Tag::MultiplierUpper => {
                let w = self.trace.q_upper[k];
                (-w * e.value, -w)
            }
        }
    }
}

fn exhausted(target: f64, p: f64, q: f64, prev: f64, ascending: bool) -> Result<(f64, f64, f64)> {
    if q > 0.0 {
        let d = (target - p) / q;
        let d = if ascending { d.max(prev) } else { d.min(prev) };
        return Ok((d, p, q));
    }
    if (p - target).abs() <= tol::FEAS_REL * target.abs().max(1.0) {
        return Ok((prev, p, q));
    }
    Err(Error::internal(format!("breakpoint pools exhausted at z = {p} before reaching {target}")))
}

fn check_variable(j: usize, a: f64, l: f64, u: f64) -> Result<()> {
    if !a.is_finite() || !l.is_finite() || !u.is_finite() {
        return Err(Error::invalid(format!("non-finite value at index {j}")));
    }
    if a <= 0.0 {
        return Err(Error::invalid(format!("a[{j}] not positive")));
    }
    if l > u {
        return Err(Error::invalid(format!("l[{j}] > u[{j}]")));
    }
    Ok(())
}
