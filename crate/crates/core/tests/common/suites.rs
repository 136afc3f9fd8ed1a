//! Property suites shared by the lemma tests and the acceptance run. Each
//! runs `trials` random trials and reports the first failure.

use qrapnc::fast::next_lower_breakpoint;
use qrapnc::fast::next_upper_breakpoint;
use qrapnc::reference::seq_basic_steps;
use qrapnc::verify::check_exchange_optimality;
use qrapnc::{solve_fast, QrapNcInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{prefix_sums, random_instance, truncated};

pub type Outcome = Result<(), String>;

const SLACK: f64 = 1e-9;

/// Feasible, tightened instance with at least two variables.
fn draw(rng: &mut ChaCha8Rng, max_n: usize) -> QrapNcInstance {
    loop {
        let inst = random_instance(rng, max_n);
        if inst.len() < 2 {
            continue;
        }
        if let Ok(t) = inst.tighten() {
            return t;
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Raising a prefix resource never lowers any variable.
pub fn monotone_in_resource(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let inst = draw(&mut rng, 40);
        let j = rng.gen_range(0..inst.len());
        let (lo, hi) = (inst.nested_lower(j), inst.nested_upper(j));
        let (mut ra, mut rb) = (uniform(&mut rng, lo, hi), uniform(&mut rng, lo, hi));
        if ra > rb {
            std::mem::swap(&mut ra, &mut rb);
        }
        let xa = solve_fast(&truncated(&inst, j, ra)).map_err(|e| format!("trial {trial}: {e}"))?.x;
        let xb = solve_fast(&truncated(&inst, j, rb)).map_err(|e| format!("trial {trial}: {e}"))?.x;
        if let Some(i) = (0..=j).find(|&i| xa[i] > xb[i] + SLACK) {
            return Err(format!("trial {trial}: x_{i}({ra}) = {} > x_{i}({rb}) = {}", xa[i], xb[i]));
        }
    }
    Ok(())
}

/// Every solution of the next prefix problem lies between the current
/// prefix solutions at `L_j` and `U_j`.
pub fn bound_nesting(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let inst = draw(&mut rng, 50);
        let run = seq_basic_steps(&inst).map_err(|e| format!("trial {trial}: {e}"))?;
        let j = rng.gen_range(0..inst.len() - 1);
        let c = uniform(&mut rng, inst.nested_lower(j + 1), inst.nested_upper(j + 1));
        let y = solve_fast(&truncated(&inst, j + 1, c)).map_err(|e| format!("trial {trial}: {e}"))?.x;
        let step = &run.steps[j];
        for i in 0..=j {
            if y[i] < step.at_lower[i] - SLACK || y[i] > step.at_upper[i] + SLACK {
                return Err(format!(
                    "trial {trial}: y_{i} = {} outside [{}, {}] at j = {j}",
                    y[i], step.at_lower[i], step.at_upper[i]
                ));
            }
        }
    }
    Ok(())
}

/// Any point inside the step-`j` bounds satisfies every nested constraint
/// up to `j`.
pub fn bounds_imply_feasibility(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let inst = draw(&mut rng, 50);
        let run = seq_basic_steps(&inst).map_err(|e| format!("trial {trial}: {e}"))?;
        let j = rng.gen_range(0..run.steps.len());
        let step = &run.steps[j];
        for _ in 0..20 {
            let y: Vec<f64> =
                step.at_lower.iter().zip(&step.at_upper).map(|(lo, hi)| uniform(&mut rng, *lo, hi.max(*lo))).collect();
            for (k, s) in prefix_sums(&y).iter().enumerate() {
                let scale = SLACK * s.abs().max(1.0);
                if *s < inst.prefix_lower[k] - scale || *s > inst.prefix_upper[k] + scale {
                    return Err(format!("trial {trial}: prefix {k} sum {s} violates bounds at j = {j}"));
                }
            }
        }
    }
    Ok(())
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0)
}

/// The step bounds divided by `a_i` evolve by clamping the new multipliers
/// into the previous breakpoint interval.
pub fn breakpoint_evolution(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let inst = draw(&mut rng, 30);
        let run = seq_basic_steps(&inst).map_err(|e| format!("trial {trial}: {e}"))?;
        let (a, l, u) = (inst.weights(), inst.lower(), inst.upper());
        for (j, step) in run.steps.iter().enumerate() {
            for i in 0..=j {
                let (alpha, beta) = if i == j {
                    (l[j] / a[j], u[j] / a[j])
                } else {
                    let prev = &run.steps[j - 1];
                    (prev.at_lower[i] / a[i], prev.at_upper[i].max(prev.at_lower[i]) / a[i])
                };
                let lower = next_lower_breakpoint(alpha, beta, step.kappa);
                let upper = next_upper_breakpoint(alpha, beta, step.lambda);
                if !close(lower, step.at_lower[i] / a[i]) {
                    return Err(format!(
                        "trial {trial}: lower {lower} vs {} at (i, j) = ({i}, {j})",
                        step.at_lower[i] / a[i]
                    ));
                }
                if !close(upper, step.at_upper[i] / a[i]) {
                    return Err(format!(
                        "trial {trial}: upper {upper} vs {} at (i, j) = ({i}, {j})",
                        step.at_upper[i] / a[i]
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Where the recovered multiplier leaves the `[κ_j, λ_j]` window the
/// corresponding nested bound is tight, and the exchange check agrees that
/// the solution is optimal.
pub fn chi_classification(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let inst = draw(&mut rng, 60);
        let sol = solve_fast(&inst).map_err(|e| format!("trial {trial}: {e}"))?;
        let t = sol.trace.as_ref().ok_or("no trace")?;
        let sums = prefix_sums(&sol.x);
        for j in 0..inst.len() - 1 {
            let (lo, hi, s) = (inst.prefix_lower[j], inst.prefix_upper[j], sums[j]);
            let ok = if t.chi[j + 1] <= t.kappa[j] {
                (s - lo).abs() <= 1e-7
            } else if t.chi[j + 1] >= t.lambda[j] {
                (s - hi).abs() <= 1e-7
            } else {
                s - lo > -1e-7 && hi - s > -1e-7
            };
            if !ok {
                return Err(format!(
                    "trial {trial}: j = {j}, chi = {}, window [{}, {}], sum {s} in [{lo}, {hi}]",
                    t.chi[j + 1],
                    t.kappa[j],
                    t.lambda[j]
                ));
            }
        }
        let e = check_exchange_optimality(&inst, &sol.x, 1e-7).map_err(|e| e.to_string())?;
        if !e.holds(1e-7) {
            return Err(format!("trial {trial}: exchange check rejects the solution: {e:?}"));
        }
    }
    Ok(())
}

/// `κ_j ≤ χ_j ≤ λ_j` and the last three coincide.
pub fn trace_sanity(trials: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let inst = draw(&mut rng, 60);
        let sol = solve_fast(&inst).map_err(|e| format!("trial {trial}: {e}"))?;
        let t = sol.trace.as_ref().ok_or("no trace")?;
        let n = inst.len();
        if t.kappa.len() != n || t.lambda.len() != n || t.chi.len() != n {
            return Err(format!("trial {trial}: trace length mismatch"));
        }
        for j in 0..n {
            if !(t.kappa[j] <= t.chi[j] && t.chi[j] <= t.lambda[j]) {
                return Err(format!("trial {trial}: j = {j}: {} ≤ {} ≤ {} fails", t.kappa[j], t.chi[j], t.lambda[j]));
            }
        }
        if !(t.chi[n - 1] == t.kappa[n - 1] && t.kappa[n - 1] == t.lambda[n - 1]) {
            return Err(format!("trial {trial}: final multipliers differ"));
        }
    }
    Ok(())
}

pub const ALL: [(&str, fn(usize, u64) -> Outcome); 6] = [
    ("monotonicity in the prefix resource", monotone_in_resource),
    ("bound nesting", bound_nesting),
    ("step bounds imply feasibility", bounds_imply_feasibility),
    ("breakpoint evolution", breakpoint_evolution),
    ("multiplier classification vs tight constraints", chi_classification),
    ("trace sanity", trace_sanity),
];
