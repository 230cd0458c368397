//! Continuous-time simulation of the lattice and profile dynamics, and
//! relaxation rates estimated from the sampled autocorrelation.
//!
//! Symmetric observables (functions of the profile `ω`) only see the
//! spectrum of the profile chain, so estimates are compared against the
//! profile gap, which [`exact_profile_gap`] computes.

mod estimate;
mod gillespie;

pub use estimate::{
    autocorrelation, relaxation_estimate, relaxation_estimate_with, EstimatorOptions, RelaxationEstimate,
    BOOTSTRAP_SALT,
};
pub use gillespie::{gillespie_run, run_replicas, Event, SimulationRun, Simulator, TimeSeries};

use crate::error::{invalid, Error, Result};
use crate::operators::profile_generator;
use crate::spectral::dense_gap;
use crate::state_space::EnsembleParams;

/// Largest stick count the lattice mode represents (one `u64` per row).
pub const MAX_LATTICE_STICKS: usize = 64;

/// Samples a single run may emit.
pub const MAX_SAMPLES: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Individual particles on the `L × H` lattice.
    Lattice,
    /// Row occupations only.
    Profile,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Lattice => "lattice",
            Mode::Profile => "profile",
        }
    }
}

/// The sampled observable, a function of the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    /// `ω_h` for `1 ≤ h ≤ H`.
    Row(usize),
    /// `Σ_h h·ω_h`.
    Height,
}

impl Observable {
    /// `ω_{h₀}` with `h₀ = round(ρ)`, clamped to `1..=H`.
    pub fn default_for(params: &EnsembleParams) -> Self {
        let h0 = params.density().round() as usize;
        Observable::Row(h0.clamp(1, params.height))
    }

    pub fn eval(&self, profile: &[usize]) -> f64 {
        match *self {
            Observable::Row(h) => profile[h - 1] as f64,
            Observable::Height => profile.iter().enumerate().map(|(h, &w)| ((h + 1) * w) as f64).sum(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Observable::Row(h) => format!("row{h}"),
            Observable::Height => "height".into(),
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "height" {
            return Ok(Observable::Height);
        }
        s.strip_prefix("row")
            .and_then(|h| h.parse().ok())
            .map(Observable::Row)
            .ok_or_else(|| invalid(format!("unknown observable {s:?}; expected rowH or height")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimulationPlan {
    pub params: EnsembleParams,
    pub mode: Mode,
    pub seed: u64,
    /// Samples and occupancy are recorded on `[t_burn, t_run]`.
    pub t_burn: f64,
    pub t_run: f64,
    pub observable: Observable,
    pub sample_dt: f64,
}

impl SimulationPlan {
    /// A plan with the default observable.
    pub fn new(params: EnsembleParams, mode: Mode, seed: u64, t_burn: f64, t_run: f64, sample_dt: f64) -> Result<Self> {
        let plan = SimulationPlan {
            params,
            mode,
            seed,
            t_burn,
            t_run,
            observable: Observable::default_for(&params),
            sample_dt,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_observable(mut self, observable: Observable) -> Result<Self> {
        self.observable = observable;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SimulationPlan { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.is_degenerate() {
            return Err(invalid("the sector holds a single configuration; nothing moves"));
        }
        if self.params.height < 2 {
            return Err(invalid("H = 1 has no moves"));
        }
        if self.mode == Mode::Lattice && self.params.sticks > MAX_LATTICE_STICKS {
            return Err(invalid(format!("lattice mode supports at most {MAX_LATTICE_STICKS} sticks")));
        }
        if !(self.t_burn >= 0.0 && self.t_run > self.t_burn && self.t_run.is_finite()) {
            return Err(invalid("need 0 ≤ t_burn < t_run < ∞"));
        }
        if !(self.sample_dt > 0.0) {
            return Err(invalid("sample_dt must be positive"));
        }
        if (self.t_run - self.t_burn) / self.sample_dt > MAX_SAMPLES as f64 {
            return Err(invalid(format!("more than {MAX_SAMPLES} samples requested")));
        }
        if let Observable::Row(h) = self.observable {
            if h == 0 || h > self.params.height {
                return Err(invalid(format!("row {h} outside 1..={}", self.params.height)));
            }
        }
        Ok(())
    }
}

/// Gap of the profile generator, the slowest rate a symmetric observable
/// can display.
pub fn exact_profile_gap(params: &EnsembleParams) -> Result<f64> {
    let op = profile_generator(params)?;
    let r = dense_gap(&op)?;
    if r.is_degenerate() {
        return Err(Error::DegenerateSector);
    }
    Ok(r.gap)
}
