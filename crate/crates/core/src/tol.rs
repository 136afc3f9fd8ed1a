//! Numerical tolerances shared by the solvers.

/// Relative tolerance for "equal" comparisons inside breakpoint sweeps and
/// the corner-case tests of the fast solver.
pub const EQ_REL: f64 = 1e-12;

/// Relative tolerance under which `L_j` and `U_j` are treated as equal and
/// the instance is split at `j`.
pub const SPLIT_REL: f64 = 1e-12;

/// Slack granted to resource-feasibility checks of plain QRAP subproblems,
/// relative to the magnitude of the bound sums. Subproblems assembled from
/// earlier solutions miss their bounds by rounding error only.
pub const FEAS_REL: f64 = 1e-9;

/// Default absolute verification tolerance on unit-scale instances.
pub const VERIFY_ABS: f64 = 1e-7;

#[inline]
pub fn approx_eq(value: f64, target: f64) -> bool {
    (value - target).abs() <= EQ_REL * target.abs().max(1.0)
}

#[inline]
pub fn bounds_equal(lo: f64, hi: f64) -> bool {
    (hi - lo).abs() <= SPLIT_REL * lo.abs().max(hi.abs()).max(1.0)
}
