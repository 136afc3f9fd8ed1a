//! Scaling experiments, power-law fits and summary statistics.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{QrapNcInstance, Solution};
use crate::synthetic::gen_synthetic;
use crate::verify;

pub trait Solver: Sync {
    fn name(&self) -> &str;
    fn solve(&self, inst: &QrapNcInstance) -> Result<Solution>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fast,
    SeqBasic,
    Inf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Fast, Algorithm::SeqBasic, Algorithm::Inf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Fast => "fast",
            Algorithm::SeqBasic => "seq-basic",
            Algorithm::Inf => "inf",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm {s:?} (expected fast, seq-basic or inf)")))
    }
}

impl Solver for Algorithm {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn solve(&self, inst: &QrapNcInstance) -> Result<Solution> {
        match self {
            Algorithm::Fast => crate::solve_fast(inst),
            Algorithm::SeqBasic => crate::solve_seq_basic(inst),
            Algorithm::Inf => crate::solve_inf(inst),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub algorithm: String,
    pub seed: u64,
    pub time_s: f64,
    pub tight_count: Option<usize>,
    pub split_count: Option<usize>,
    /// Solver error message; the counts are empty when set.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub c1: f64,
    pub c2: f64,
    /// Root mean square of the residuals in `ln t`.
    pub residual: f64,
}

impl PowerFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.c1 * n.powf(self.c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub max: f64,
    /// Sample standard deviation over mean; absent for a single sample.
    pub cov: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; 1 runs every cell serially on the calling thread.
    pub jobs: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of repetition `rep` at size `n`, independent of the other sizes run.
pub fn instance_seed(master: u64, n: usize, rep: usize) -> u64 {
    splitmix64(splitmix64(master ^ n as u64).wrapping_add(rep as u64))
}

/// Times a solve; returns the record without counts.
pub fn time_one(solver: &dyn Solver, inst: &QrapNcInstance, seed: u64) -> (BenchRecord, Option<Solution>) {
    let start = Instant::now();
    let result = solver.solve(inst);
    let time_s = start.elapsed().as_nanos().max(1) as f64 * 1e-9;
    let mut record = BenchRecord {
        n: inst.len(),
        algorithm: solver.name().to_string(),
        seed,
        time_s,
        tight_count: None,
        split_count: None,
        error: None,
    };
    match result {
        Ok(sol) => {
            record.split_count = Some(sol.splits.len());
            (record, Some(sol))
        }
        Err(e) => {
            record.error = Some(e.to_string());
            (record, None)
        }
    }
}

fn run_cell(solver: &dyn Solver, n: usize, seed: u64) -> BenchRecord {
    let inst = gen_synthetic(n, seed);
    let (mut record, sol) = time_one(solver, &inst, seed);
    if let Some(sol) = sol {
        let tol = verify::default_tolerance(&inst);
        record.tight_count = verify::tight_constraints(&inst, &sol.x, tol).ok().map(|t| verify::tight_count(&t));
    }
    record
}

/// One record per (size, repetition, solver), in that nesting order whatever
/// the number of jobs.
pub fn run_scaling(config: &ScalingConfig, solvers: &[&dyn Solver]) -> Result<Vec<BenchRecord>> {
    if config.sizes.contains(&0) {
        return Err(Error::invalid("sizes must be positive"));
    }
    if config.reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    let cells: Vec<(usize, u64, usize)> = config
        .sizes
        .iter()
        .flat_map(|&n| (0..config.reps).map(move |r| (n, r)))
        .flat_map(|(n, r)| (0..solvers.len()).map(move |s| (n, instance_seed(config.seed, n, r), s)))
        .collect();
    if config.jobs <= 1 {
        return Ok(cells.iter().map(|&(n, seed, s)| run_cell(solvers[s], n, seed)).collect());
    }
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<BenchRecord>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|scope| {
        for _ in 0..config.jobs.min(cells.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, seed, s)) = cells.get(k) else { break };
                let record = run_cell(solvers[s], n, seed);
                out.lock().expect("no worker panics while holding the lock")[k] = Some(record);
            });
        }
    });
    Ok(out.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every cell ran")).collect())
}

/// Least squares on `(ln n, ln t)` over the error-free records.
pub fn fit_power_law(records: &[BenchRecord]) -> Result<PowerFit> {
    let points: Vec<(f64, f64)> =
        records.iter().filter(|r| r.error.is_none()).map(|r| ((r.n as f64).ln(), r.time_s.ln())).collect();
    let first = points.first().map(|p| p.0);
    if points.iter().all(|p| Some(p.0) == first) {
        return Err(Error::invalid("power-law fit needs at least two distinct sizes"));
    }
    if records.iter().any(|r| r.error.is_none() && !(r.time_s > 0.0)) {
        return Err(Error::invalid("times must be positive"));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let c2 = sxy / sxx;
    let ln_c1 = my - c2 * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - ln_c1 - c2 * p.0).powi(2)).sum();
    Ok(PowerFit { c1: ln_c1.exp(), c2, residual: (sse / m).sqrt() })
}

pub fn summarize(samples: &[f64]) -> Result<Summary> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot summarise an empty group"));
    }
    let count = samples.len();
    let mean = samples.iter().sum::<f64>() / count as f64;
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cov = (count > 1).then(|| {
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        var.sqrt() / mean
    });
    Ok(Summary { count, mean, max, cov })
}

/// Time summaries per `(algorithm, n)`, skipping failed rows.
pub fn summarize_records(records: &[BenchRecord]) -> BTreeMap<(String, usize), Summary> {
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.error.is_none()) {
        groups.entry((r.algorithm.clone(), r.n)).or_default().push(r.time_s);
    }
    groups.into_iter().map(|(k, v)| (k, summarize(&v).expect("groups are nonempty"))).collect()
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut records = Vec::new();
    for row in rdr.deserialize() {
        let r: BenchRecord = row?;
        records.push(r);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, t: f64) -> BenchRecord {
        BenchRecord {
            n,
            algorithm: "fast".into(),
            seed: 0,
            time_s: t,
            tight_count: None,
            split_count: None,
            error: None,
        }
    }

    #[test]
    fn fit_exact_laws() {
        let r: Vec<_> = [10, 100, 1000].iter().map(|&n| rec(n, 2.0 * n as f64)).collect();
        let f = fit_power_law(&r).unwrap();
        assert!((f.c1 - 2.0).abs() < 1e-9 && (f.c2 - 1.0).abs() < 1e-12 && f.residual < 1e-12);

        let r: Vec<_> = [10, 100, 1000].iter().map(|&n| rec(n, 3.0 * (n * n) as f64)).collect();
        assert!((fit_power_law(&r).unwrap().c2 - 2.0).abs() < 1e-12);

        assert!(fit_power_law(&[rec(10, 1.0), rec(10, 2.0)]).is_err());
        assert!(fit_power_law(&[]).is_err());
    }

    #[test]
    fn fit_noisy_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut r = Vec::new();
        for n in [1_000usize, 3_000, 10_000, 30_000, 100_000, 300_000, 1_000_000] {
            for _ in 0..10 {
                r.push(rec(n, (n as f64).powf(1.05) * rng.gen_range(0.9..1.1)));
            }
        }
        let f = fit_power_law(&r).unwrap();
        assert!((f.c2 - 1.05).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn summary_examples() {
        assert_eq!(summarize(&[1., 1., 1.]).unwrap(), Summary { count: 3, mean: 1., max: 1., cov: Some(0.) });
        let s = summarize(&[1., 3.]).unwrap();
        assert_eq!((s.mean, s.max), (2., 3.));
        assert!((s.cov.unwrap() - std::f64::consts::SQRT_2 / 2.0).abs() < 1e-12);
        assert_eq!(summarize(&[4.]).unwrap().cov, None);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn scaling_cardinality_and_determinism() {
        let cfg = ScalingConfig { sizes: vec![10], reps: 2, seed: 4, jobs: 1 };
        let r = run_scaling(&cfg, &[&Algorithm::Fast]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|r| r.n == 10 && r.time_s > 0.0 && r.error.is_none()));
        let again = run_scaling(&cfg, &[&Algorithm::Fast]).unwrap();
        let seeds = |v: &[BenchRecord]| v.iter().map(|r| r.seed).collect::<Vec<_>>();
        assert_eq!(seeds(&r), seeds(&again));
        assert_ne!(r[0].seed, r[1].seed);

        let par = run_scaling(&ScalingConfig { jobs: 3, ..cfg.clone() }, &[&Algorithm::Fast, &Algorithm::Inf]).unwrap();
        let ser = run_scaling(&cfg, &[&Algorithm::Fast, &Algorithm::Inf]).unwrap();
        let key =
            |v: &[BenchRecord]| v.iter().map(|r| (r.n, r.seed, r.algorithm.clone(), r.tight_count)).collect::<Vec<_>>();
        assert_eq!(key(&par), key(&ser));
    }

    struct NoOp;

    impl Solver for NoOp {
        fn name(&self) -> &str {
            "noop"
        }

        fn solve(&self, _: &QrapNcInstance) -> Result<Solution> {
            Ok(Solution { x: Vec::new(), objective: 0.0, trace: None, splits: Vec::new() })
        }
    }

    #[test]
    fn timing_excludes_generation() {
        let cfg = ScalingConfig { sizes: vec![200_000], reps: 1, seed: 1, jobs: 1 };
        let r = run_scaling(&cfg, &[&NoOp]).unwrap();
        assert!(r[0].time_s < 1e-3, "{}", r[0].time_s);
    }

    struct Failing;

    impl Solver for Failing {
        fn name(&self) -> &str {
            "failing"
        }

        fn solve(&self, _: &QrapNcInstance) -> Result<Solution> {
            Err(Error::internal("boom"))
        }
    }

    #[test]
    fn errors_are_recorded() {
        let cfg = ScalingConfig { sizes: vec![5, 6], reps: 1, seed: 1, jobs: 1 };
        let r = run_scaling(&cfg, &[&Failing, &Algorithm::Fast]).unwrap();
        assert_eq!(r.len(), 4);
        assert!(r[0].error.as_deref().unwrap().contains("boom"));
        assert!(r[1].error.is_none());
    }

    #[test]
    fn csv_round_trip() {
        let mut a = rec(10, 1.234_567_890_123e-5);
        a.tight_count = Some(3);
        a.split_count = Some(0);
        let mut b = rec(20, 0.1 + 0.2);
        b.algorithm = "inf".into();
        b.seed = u64::MAX;
        b.error = Some("infeasible instance: R, \"quoted\"".into());
        let mut buf = Vec::new();
        write_csv(&[a.clone(), b.clone()], &mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with("n,algorithm,seed,time_s,tight_count,split_count,error\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), vec![a, b]);
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("bogus".parse::<Algorithm>().is_err());
    }
}
