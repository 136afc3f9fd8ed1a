//! Random feasible instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{QrapInstance, QrapNcInstance};

/// Weights below this are redrawn; `x_i / a_i` becomes unstable near zero.
pub const MIN_WEIGHT: f64 = 1e-9;

/// Draws `a ~ U(0,1)`, `l ~ U(0.1,0.5)`, `u ~ U(0.5,0.9)`, then two random
/// feasible points `X, Y` with `l ≤ X, Y ≤ u`. The nested bounds are the
/// pointwise min and max of their prefix sums and `R` is the mean of the
/// totals, so the instance is feasible by construction.
pub fn gen_synthetic(n: usize, seed: u64) -> QrapNcInstance {
    assert!(n >= 1, "instance needs at least one variable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let mut w: f64 = rng.gen();
        while w < MIN_WEIGHT {
            w = rng.gen();
        }
        a.push(w);
        l.push(rng.gen_range(0.1..0.5));
        u.push(rng.gen_range(0.5..0.9));
    }
    let mut lower = Vec::with_capacity(n - 1);
    let mut upper = Vec::with_capacity(n - 1);
    let (mut v, mut w) = (0.0f64, 0.0f64);
    for i in 0..n {
        v += rng.gen_range(l[i]..=u[i]);
        w += rng.gen_range(l[i]..=u[i]);
        if i + 1 < n {
            lower.push(v.min(w));
            upper.push(v.max(w));
        }
    }
    let r = 0.5 * (v + w);
    QrapNcInstance {
        qrap: QrapInstance { weights: a, lower: l, upper: u, resource: r },
        prefix_lower: lower,
        prefix_upper: upper,
    }
}
