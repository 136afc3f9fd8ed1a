//! `qrapnc`: generate, solve, verify and benchmark QRAP-NC instances.
//!
//! Exit codes: 0 success, 1 verification failure or internal error,
//! 2 usage or input error, 3 infeasible instance.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qrapnc::battery::{household_profile, BatteryScenario, Preset, HORIZON};
use qrapnc::bench::{fit_power_law, run_scaling, summarize_records, write_csv, ScalingConfig, Solver};
use qrapnc::io::{instance_to_json, parse_instance, parse_profile, parse_scenario, parse_solution, SolutionDoc};
use qrapnc::verify::{default_tolerance, tight_constraints, tight_count, verify};
use qrapnc::{gen_synthetic, Algorithm, Error};

#[derive(Parser)]
#[command(name = "qrapnc", version, about = "Quadratic resource allocation with nested prefix-sum bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random feasible instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the instance for a battery scenario, or solve it with --schedule.
    Battery {
        /// small, medium, large, or a scenario JSON file.
        #[arg(long)]
        scenario: String,
        /// Base load, one value per line. Defaults to a synthetic
        /// aggregate of --households homes.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Start and end state of charge as a fraction of capacity.
        #[arg(long, default_value_t = 0.5)]
        soc_frac: f64,
        #[arg(long, default_value_t = HORIZON)]
        horizon: usize,
        #[arg(long, default_value_t = 40)]
        households: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit the charging schedule and state of charge instead.
        #[arg(long)]
        schedule: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance.
    Solve {
        #[arg(long, value_enum, default_value_t = Alg::Fast)]
        algorithm: Alg,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the multipliers kappa, lambda and chi.
        #[arg(long)]
        trace: bool,
    },
    /// Check a solution for feasibility and optimality.
    Verify {
        /// Instance file; defaults to the instance embedded in the solution.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Solution file; defaults to stdin.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Time the solvers on random instances and write CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "fast")]
        algorithms: Vec<Alg>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Fast,
    SeqBasic,
    Inf,
}

impl From<Alg> for Algorithm {
    fn from(a: Alg) -> Self {
        match a {
            Alg::Fast => Algorithm::Fast,
            Alg::SeqBasic => Algorithm::SeqBasic,
            Alg::Inf => Algorithm::Inf,
        }
    }
}

enum Failure {
    Stage(&'static str, Error),
    Rejected(String),
}

type Outcome<T> = Result<T, Failure>;

trait Stage<T> {
    fn stage(self, name: &'static str) -> Outcome<T>;
}

impl<T, E: Into<Error>> Stage<T> for Result<T, E> {
    fn stage(self, name: &'static str) -> Outcome<T> {
        self.map_err(|e| Failure::Stage(name, e.into()))
    }
}

fn read_input(path: Option<&Path>) -> Outcome<String> {
    match path {
        Some(p) => fs::read_to_string(p).stage("read"),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).stage("read")?;
            Ok(s)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).stage("write"),
        None => writeln!(io::stdout().lock(), "{text}").stage("write"),
    }
}

fn json<T: serde::Serialize>(value: &T) -> Outcome<String> {
    serde_json::to_string(value).stage("write")
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Generate { n, seed, out } => {
            if n == 0 {
                return Err(Failure::Stage("generate", Error::Invalid("--n must be at least 1".into())));
            }
            write_output(out.as_deref(), &instance_to_json(&gen_synthetic(n, seed)).stage("write")?)
        }
        Command::Battery { scenario, profile, soc_frac, horizon, households, seed, schedule, out } => {
            let scn = match scenario.parse::<Preset>() {
                Ok(preset) => {
                    let mut p = match &profile {
                        Some(path) => parse_profile(&read_input(Some(path))?).stage("profile")?,
                        None => household_profile(horizon, households, seed),
                    };
                    p.truncate(horizon);
                    BatteryScenario::preset(preset, p, soc_frac).stage("scenario")?
                }
                Err(_) => parse_scenario(&read_input(Some(Path::new(&scenario)))?).stage("scenario")?,
            };
            let (inst, _) = scn.to_qrapnc().stage("scenario")?;
            if !schedule {
                return write_output(out.as_deref(), &instance_to_json(&inst).stage("write")?);
            }
            let sol = qrapnc::solve_fast(&inst).stage("solve")?;
            let sched = scn.from_solution(&sol.x).stage("schedule")?;
            let tight = tight_constraints(&inst, &sol.x, default_tolerance(&inst)).stage("schedule")?;
            let doc = serde_json::json!({
                "x": sched.x,
                "soc": sched.soc,
                "flagged": sched.flagged,
                "tight_count": tight_count(&tight),
            });
            write_output(out.as_deref(), &json(&doc)?)
        }
        Command::Solve { algorithm, input, out, trace } => {
            let inst = parse_instance(&read_input(input.as_deref())?).stage("parse")?;
            let sol = Algorithm::from(algorithm).solve(&inst).stage("solve")?;
            write_output(out.as_deref(), &json(&SolutionDoc::new(&sol, trace, Some(&inst)))?)
        }
        Command::Verify { input, solution, tol } => {
            let doc = parse_solution(&read_input(solution.as_deref())?).stage("parse solution")?;
            let inst = match &input {
                Some(path) => parse_instance(&read_input(Some(path))?).stage("parse instance")?,
                None => doc.instance().stage("parse instance")?.ok_or_else(|| {
                    Failure::Stage(
                        "parse instance",
                        Error::Invalid("no --in given and no instance in the solution".into()),
                    )
                })?,
            };
            let tol = tol.unwrap_or_else(|| default_tolerance(&inst));
            let report = verify(&inst, &doc.x, tol).stage("verify")?;
            write_output(None, &json(&report)?)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Rejected(format!(
                    "verify: solution is {}",
                    if report.feasible { "not optimal" } else { "infeasible" }
                )))
            }
        }
        Command::Bench { sizes, reps, seed, algorithms, out, jobs } => {
            let algorithms: Vec<Algorithm> = algorithms.into_iter().map(Algorithm::from).collect();
            let solvers: Vec<&dyn Solver> = algorithms.iter().map(|a| a as &dyn Solver).collect();
            let config = ScalingConfig { sizes, reps, seed, jobs };
            let records = run_scaling(&config, &solvers).stage("bench")?;
            let mut buf = Vec::new();
            write_csv(&records, &mut buf).stage("write")?;
            match &out {
                Some(p) => fs::write(p, &buf).stage("write")?,
                None => io::stdout().lock().write_all(&buf).stage("write")?,
            }
            let mut err = io::stderr().lock();
            for ((alg, n), s) in summarize_records(&records) {
                let cov = s.cov.map_or("-".to_string(), |c| format!("{c:.3}"));
                let _ = writeln!(err, "{alg:>9} n={n:<8} mean {:.6} s  max {:.6} s  cov {cov}", s.mean, s.max);
            }
            for alg in &algorithms {
                let rows: Vec<_> = records.iter().filter(|r| r.algorithm == alg.as_str()).cloned().collect();
                if let Ok(fit) = fit_power_law(&rows) {
                    let _ = writeln!(err, "{alg:>9} fit t = {:.3e} n^{:.3}", fit.c1, fit.c2);
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Stage(stage, e)) => {
            eprintln!("error: {stage}: {e}");
            ExitCode::from(match e {
                Error::Infeasible(_) => 3,
                Error::Internal(_) => 1,
                _ => 2,
            })
        }
    }
}
