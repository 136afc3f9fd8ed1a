//! Quadratic resource allocation with nested lower and upper bounds on the
//! prefix sums (QRAP-NC):
//!
//! ```text
//! min  Σ ½ x_i² / a_i
//! s.t. Σ x_i = R,   L_j ≤ x_1 + … + x_j ≤ U_j  (j < n),   l ≤ x ≤ u
//! ```
//!
//! [`solve_fast`] is the O(n log n) breakpoint solver. [`solve_seq_basic`] and
//! [`solve_inf`] are slower reference solvers used for cross-checking, and
//! [`verify`] certifies a candidate solution independently of all three.

pub mod battery;
pub mod bench;
pub mod depq;
pub mod error;
pub mod fast;
pub mod fuzzing;
pub mod instance;
pub mod io;
pub mod qrap;
pub mod reference;
pub mod synthetic;
pub mod tol;
pub mod verify;

pub use battery::{BatteryScenario, Preset, Schedule};
pub use bench::{Algorithm, Solver};
pub use error::{Error, Result};
pub use fast::{solve_fast, FastStream, MultiplierTrace};
pub use instance::{objective, QrapInstance, QrapNcInstance, RawInstance, Solution};
pub use reference::{solve_inf, solve_seq_basic};
pub use synthetic::gen_synthetic;
pub use verify::VerificationReport;

/// Solves with the chosen algorithm.
pub fn solve(inst: &QrapNcInstance, algorithm: Algorithm) -> Result<Solution> {
    algorithm.solve(inst)
}
