#![allow(dead_code)]

pub mod depq_model;
pub mod suites;

use qrapnc::fuzzing::decode_instance;
use qrapnc::{gen_synthetic, objective, QrapInstance, QrapNcInstance};
use rand::Rng;

/// The first `j + 1` variables with the nested bounds before `j` and
/// resource `r`.
pub fn truncated(inst: &QrapNcInstance, j: usize, r: f64) -> QrapNcInstance {
    let qrap =
        QrapInstance::new(inst.weights()[..=j].to_vec(), inst.lower()[..=j].to_vec(), inst.upper()[..=j].to_vec(), r)
            .unwrap();
    QrapNcInstance::new(qrap, inst.prefix_lower[..j].to_vec(), inst.prefix_upper[..j].to_vec()).unwrap()
}

/// Either a synthetic instance or a small-integer one with many ties; may
/// be infeasible in the second case.
pub fn random_instance(rng: &mut impl Rng, max_n: usize) -> QrapNcInstance {
    if rng.gen_bool(0.5) {
        gen_synthetic(rng.gen_range(1..=max_n), rng.gen())
    } else {
        let mut bytes = vec![0u8; 8 * max_n + 1];
        rng.fill_bytes(&mut bytes);
        bytes[0] = (rng.gen_range(1..=max_n.min(12)) - 1) as u8;
        decode_instance(&bytes).expect("decoder builds valid instances")
    }
}

/// Exact minimum by enumerating active sets: every variable at `l`, at `u`
/// or free, every nested prefix at `L`, at `U` or free. The optimum makes
/// some set active and minimises the objective over the corresponding
/// affine subspace, where free variables in a block share its residual in
/// proportion to `a`. Feasible instances only; `3^(2n-1)` candidates.
pub fn brute_force(inst: &QrapNcInstance) -> Option<(f64, Vec<f64>)> {
    let n = inst.len();
    assert!(n <= 7, "brute force is exponential");
    let (a, l, u) = (inst.weights(), inst.lower(), inst.upper());
    let scale = inst.resource().abs().max(1.0);
    let slack = 1e-9 * scale;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut x = vec![0.0; n];
    for nested in 0..3usize.pow(n as u32 - 1) {
        // Block ends and their prefix targets; the last block ends at R.
        let mut ends = Vec::new();
        let mut code = nested;
        for j in 0..n - 1 {
            match code % 3 {
                1 => ends.push((j, inst.prefix_lower[j])),
                2 => ends.push((j, inst.prefix_upper[j])),
                _ => {}
            }
            code /= 3;
        }
        ends.push((n - 1, inst.resource()));
        'vars: for vars in 0..3usize.pow(n as u32) {
            let mut code = vars;
            let mut status = [0u8; 8];
            for s in status.iter_mut().take(n) {
                *s = (code % 3) as u8;
                code /= 3;
            }
            let (mut start, mut before) = (0, 0.0);
            for &(end, target) in &ends {
                let (mut fixed, mut weight) = (0.0, 0.0);
                for i in start..=end {
                    match status[i] {
                        0 => fixed += l[i],
                        1 => fixed += u[i],
                        _ => weight += a[i],
                    }
                }
                let residual = target - before - fixed;
                if weight == 0.0 && residual.abs() > slack {
                    continue 'vars;
                }
                for i in start..=end {
                    x[i] = match status[i] {
                        0 => l[i],
                        1 => u[i],
                        _ => a[i] * residual / weight,
                    };
                }
                start = end + 1;
                before = target;
            }
            if !feasible(inst, &x, slack) {
                continue;
            }
            let f = objective(a, &x);
            if best.as_ref().is_none_or(|(b, _)| f < *b) {
                best = Some((f, x.clone()));
            }
        }
    }
    best
}

pub fn feasible(inst: &QrapNcInstance, x: &[f64], slack: f64) -> bool {
    let (l, u) = (inst.lower(), inst.upper());
    let mut sum = 0.0;
    for i in 0..x.len() {
        if x[i] < l[i] - slack || x[i] > u[i] + slack {
            return false;
        }
        sum += x[i];
        let (lo, hi) = (inst.nested_lower(i), inst.nested_upper(i));
        if sum < lo - slack || sum > hi + slack {
            return false;
        }
    }
    true
}

pub fn prefix_sums(x: &[f64]) -> Vec<f64> {
    x.iter()
        .scan(0.0, |s, v| {
            *s += v;
            Some(*s)
        })
        .collect()
}

/// Summed over the state-of-charge sweep on a few profiles.
pub fn battery_tight_counts() -> Vec<usize> {
    let mut counts = vec![0; 3];
    for seed in 0..5 {
        let profile = qrapnc::battery::household_profile(qrapnc::battery::HORIZON, 40, seed);
        for (k, preset) in qrapnc::Preset::ALL.into_iter().enumerate() {
            for tenth in 0..=10 {
                let scn = qrapnc::BatteryScenario::preset(preset, profile.clone(), f64::from(tenth) / 10.0).unwrap();
                let (inst, _) = scn.to_qrapnc().unwrap();
                let sol = qrapnc::solve_inf(&inst).unwrap();
                let tol = qrapnc::verify::default_tolerance(&inst);
                let tight = qrapnc::verify::tight_constraints(&inst, &sol.x, tol).unwrap();
                counts[k] += qrapnc::verify::tight_count(&tight);
            }
        }
    }
    counts
}
