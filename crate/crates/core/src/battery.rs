//! Battery charge scheduling as a QRAP-NC instance.
//!
//! Minimising `Σ (p_i + x_i)²` over charging powers `x` with state of charge
//! `S_j = S_start + Δt Σ_{i≤j} x_i ∈ [0, D]` becomes a QRAP-NC in `y = p + x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{QrapInstance, QrapNcInstance};

/// 15-minute intervals over two days.
pub const HORIZON: usize = 192;
pub const INTERVAL_HOURS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Small,
    Medium,
    Large,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Small, Preset::Medium, Preset::Large];

    /// `(X_min, X_max, D)`.
    pub fn parameters(self) -> (f64, f64, f64) {
        match self {
            Preset::Small => (-4.0e3, 4.0e3, 8.0e4),
            Preset::Medium => (-2.0e4, 2.0e4, 4.0e5),
            Preset::Large => (-3.6e4, 3.6e4, 7.2e5),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Small => "small",
            Preset::Medium => "medium",
            Preset::Large => "large",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(Preset::Small),
            "medium" => Ok(Preset::Medium),
            "large" => Ok(Preset::Large),
            other => Err(Error::invalid(format!("unknown preset {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryScenario {
    /// Base load per interval (W).
    pub p: Vec<f64>,
    /// Interval length (h).
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Capacity (Wh).
    pub cap: f64,
    pub soc_start: f64,
    pub soc_end: f64,
}

impl BatteryScenario {
    /// Preset with `S_start = S_end = s·D`.
    pub fn preset(preset: Preset, p: Vec<f64>, soc_frac: f64) -> Result<Self> {
        let (x_min, x_max, cap) = preset.parameters();
        let scn = BatteryScenario {
            p,
            dt: INTERVAL_HOURS,
            x_min,
            x_max,
            cap,
            soc_start: soc_frac * cap,
            soc_end: soc_frac * cap,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::invalid("profile p is empty"));
        }
        if let Some(i) = self.p.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("p[{i}] not finite")));
        }
        let scalars = [self.dt, self.x_min, self.x_max, self.cap, self.soc_start, self.soc_end];
        if scalars.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scenario parameters must be finite"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid("dt not positive"));
        }
        if self.x_min > self.x_max {
            return Err(Error::invalid("x_min > x_max"));
        }
        if !(0.0..=self.cap).contains(&self.soc_start) {
            return Err(Error::invalid("soc_start outside [0, cap]"));
        }
        if !(0.0..=self.cap).contains(&self.soc_end) {
            return Err(Error::invalid("soc_end outside [0, cap]"));
        }
        Ok(())
    }

    /// Returns the instance in `y` and the prefix sums of `p`.
    pub fn to_qrapnc(&self) -> Result<(QrapNcInstance, Vec<f64>)> {
        self.validate()?;
        let n = self.p.len();
        let offsets: Vec<f64> = self
            .p
            .iter()
            .scan(0.0, |s, v| {
                *s += v;
                Some(*s)
            })
            .collect();
        let lower = self.p.iter().map(|p| p + self.x_min).collect();
        let upper = self.p.iter().map(|p| p + self.x_max).collect();
        let empty = -self.soc_start / self.dt;
        let full = (self.cap - self.soc_start) / self.dt;
        let prefix_lower = offsets[..n - 1].iter().map(|o| empty + o).collect();
        let prefix_upper = offsets[..n - 1].iter().map(|o| full + o).collect();
        let resource = (self.soc_end - self.soc_start) / self.dt + offsets[n - 1];
        let inst =
            QrapNcInstance::new(QrapInstance::new(vec![1.0; n], lower, upper, resource)?, prefix_lower, prefix_upper)?;
        Ok((inst, offsets))
    }

    pub fn from_solution(&self, y: &[f64]) -> Result<Schedule> {
        if y.len() != self.p.len() {
            return Err(Error::invalid(format!("solution has length {}, profile has {}", y.len(), self.p.len())));
        }
        let x: Vec<f64> = y.iter().zip(&self.p).map(|(y, p)| y - p).collect();
        let mut soc = Vec::with_capacity(x.len());
        let mut s = self.soc_start;
        for v in &x {
            s += self.dt * v;
            soc.push(s);
        }
        let eps = 1e-6 * self.cap.max(1.0);
        let mut flagged: Vec<usize> =
            soc.iter().enumerate().filter(|(_, s)| **s < -eps || **s > self.cap + eps).map(|(j, _)| j).collect();
        let last = x.len() - 1;
        if (soc[last] - self.soc_end).abs() > eps && !flagged.contains(&last) {
            flagged.push(last);
        }
        Ok(Schedule { x, soc, flagged })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Charging power per interval.
    pub x: Vec<f64>,
    /// State of charge at the end of each interval.
    pub soc: Vec<f64>,
    /// Intervals whose state of charge leaves `[0, D]`, or misses `S_end`
    /// at the last one, by more than `1e-6·D`.
    pub flagged: Vec<usize>,
}

/// Aggregate load of `households` homes over `n` quarter-hours (W): a base
/// load, morning and evening peaks and random appliance spikes.
pub fn household_profile(n: usize, households: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = vec![0.0; n];
    for _ in 0..households {
        let base = rng.gen_range(150.0..400.0);
        let morning = rng.gen_range(300.0..1200.0);
        let evening = rng.gen_range(800.0..2500.0);
        let shift = rng.gen_range(-1.5..1.5);
        for (t, slot) in total.iter_mut().enumerate() {
            let hour = (t as f64 * INTERVAL_HOURS) % 24.0;
            let bump = |centre: f64, width: f64| (-((hour - centre - shift) / width).powi(2)).exp();
            let mut w = base + morning * bump(7.5, 1.2) + evening * bump(19.0, 2.0);
            if rng.gen_bool(0.04) {
                w += rng.gen_range(1000.0..3000.0);
            }
            *slot += w * rng.gen_range(0.85..1.15);
        }
    }
    total
}
