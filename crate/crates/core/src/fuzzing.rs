//! Entry points for the fuzz targets and the corpus replay tests. Each takes
//! raw bytes and panics only on a genuine bug.

use crate::bench::read_csv;
use crate::instance::{QrapInstance, QrapNcInstance};
use crate::io::{parse_instance, parse_profile, parse_scenario, parse_solution};
use crate::verify::{check_exchange_optimality, check_feasibility, compare_solutions, default_tolerance};
use crate::{solve_fast, solve_inf, solve_seq_basic};

/// Largest instance the parser targets go on to solve.
const SOLVE_LIMIT: usize = 64;

pub fn instance_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(inst) = parse_instance(text) else { return };
    if inst.len() <= SOLVE_LIMIT {
        check_solvers(&inst);
    }
}

pub fn scenario_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(scn) = parse_scenario(text) else { return };
    let Ok((inst, _)) = scn.to_qrapnc() else { return };
    if inst.len() > SOLVE_LIMIT {
        return;
    }
    if let Ok(sol) = solve_fast(&inst) {
        let sched = scn.from_solution(&sol.x).expect("lengths match");
        assert_eq!(sched.soc.len(), inst.len());
    }
}

pub fn solution_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = parse_solution(text) else { return };
    if let Ok(Some(inst)) = doc.instance() {
        let tol = default_tolerance(&inst);
        // Length mismatches are reported as errors, never panics.
        let _ = crate::verify::verify(&inst, &doc.x, tol);
    }
}

pub fn profile_csv(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_profile(text) {
        assert!(!p.is_empty() && p.iter().all(|v| v.is_finite()));
    }
}

pub fn bench_csv(data: &[u8]) {
    let Ok(records) = read_csv(data) else { return };
    let mut buf = Vec::new();
    crate::bench::write_csv(&records, &mut buf).expect("writing to memory");
    let again = read_csv(&buf[..]).expect("own output parses");
    assert_eq!(again.len(), records.len());
}

/// Builds a feasible-leaning instance from bytes: small integer data so ties
/// and degenerate windows are common.
pub fn decode_instance(data: &[u8]) -> Option<QrapNcInstance> {
    let mut bytes = data.iter().copied();
    let mut next = || bytes.next().unwrap_or(0);
    let n = 1 + (next() % 12) as usize;
    let (mut a, mut l, mut u) = (Vec::new(), Vec::new(), Vec::new());
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    let (mut v, mut w) = (0.0, 0.0);
    for i in 0..n {
        a.push(1.0 + f64::from(next() % 4) * 0.5);
        let lo = f64::from(next() % 9) - 4.0;
        let hi = lo + f64::from(next() % 5);
        l.push(lo);
        u.push(hi);
        let span = hi - lo;
        v += lo + span * f64::from(next() % 3) / 2.0;
        w += lo + span * f64::from(next() % 3) / 2.0;
        if i + 1 < n {
            let slack = f64::from(next() % 3);
            let (mut lj, mut uj) = (f64::min(v, w) - slack, f64::max(v, w) + slack);
            if next() % 7 == 0 {
                lj = v;
                uj = v;
            }
            lower.push(lj);
            upper.push(uj);
        }
    }
    let r = 0.5 * (v + w);
    let qrap = QrapInstance::new(a, l, u, r).ok()?;
    QrapNcInstance::new(qrap, lower, upper).ok()
}

pub fn differential(data: &[u8]) {
    if let Some(inst) = decode_instance(data) {
        check_solvers(&inst);
    }
}

/// The three solvers agree on feasibility and, when feasible, on the optimum.
fn check_solvers(inst: &QrapNcInstance) {
    let fast = solve_fast(inst);
    let seq = solve_seq_basic(inst);
    let inf = solve_inf(inst);
    let (fast, seq, inf) = match (fast, seq, inf) {
        (Ok(f), Ok(s), Ok(i)) => (f, s, i),
        (Err(f), Err(s), Err(i)) if f.is_infeasible() && s.is_infeasible() && i.is_infeasible() => return,
        (f, s, i) => panic!("solvers disagree: fast {:?}, seq {:?}, inf {:?}", f.err(), s.err(), i.err()),
    };
    let tol = default_tolerance(inst) * 10.0;
    for other in [&seq, &inf] {
        let (abs, _) = compare_solutions(&fast.x, &other.x).expect("same length");
        assert!(abs <= tol, "fast {:?} vs {:?}", fast.x, other.x);
    }
    assert!(check_feasibility(inst, &fast.x).expect("same length").holds(tol), "{:?}", fast.x);
    assert!(check_exchange_optimality(inst, &fast.x, tol).expect("same length").holds(tol));
}
