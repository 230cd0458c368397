//! Configurations of the `L × H` rectangle, their canonical measures and the
//! single-stick occupation statistics.
//!
//! Sticks are columns `i = 0..L`, rows are `r = 0..H` with physical height
//! `h = r + 1`. A particle at height `h` carries weight `q^{2h}`, so the
//! canonical measure prefers the bottom of the box.

mod chemical;
mod measures;
mod partition;
mod sector;

pub use chemical::{chemical_potential, GrandCanonicalStats};
pub use measures::{
    hat_nu_weight, log_hat_nu_weight, log_nu_weight, nu_weight, profile_of, stick_marginal,
    stick_occupation_kernel, StickKernel,
};
pub use partition::{build_partition_table, PartitionTable};
pub use sector::{
    enumerate_lattice_configs, enumerate_profiles, BitSector, LatticeSector, ProfileSector,
};

use crate::combinatorics::MAX_SITES;
use crate::error::{invalid, Result};

/// Default bound on the number of states an exact sector may hold.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// Anisotropy `q`, stick count `L`, stick height `H` and particle number `N`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnsembleParams {
    pub q: f64,
    pub sticks: usize,
    pub height: usize,
    pub particles: usize,
}

impl EnsembleParams {
    pub fn new(q: f64, sticks: usize, height: usize, particles: usize) -> Result<Self> {
        let p = EnsembleParams {
            q,
            sticks,
            height,
            particles,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(invalid(format!("q = {} must lie in (0, 1)", self.q)));
        }
        if self.sticks == 0 || self.height == 0 {
            return Err(invalid("L and H must be at least 1"));
        }
        if self.particles > self.sites() {
            return Err(invalid(format!(
                "N = {} exceeds L·H = {}",
                self.particles,
                self.sites()
            )));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.sticks * self.height
    }

    /// Mean stick occupation `ρ = N / L`.
    pub fn density(&self) -> f64 {
        self.particles as f64 / self.sticks as f64
    }

    /// `N = 0` or `N = L·H`: a single configuration.
    pub fn is_degenerate(&self) -> bool {
        self.particles == 0 || self.particles == self.sites()
    }

    /// The sector `L·H − N`, related to this one by particle–hole exchange
    /// combined with the vertical flip `h ↦ H + 1 − h`.
    pub fn particle_hole(&self) -> Self {
        EnsembleParams {
            particles: self.sites() - self.particles,
            ..*self
        }
    }

    pub(crate) fn require_bitmask(&self) -> Result<()> {
        if self.sites() > MAX_SITES {
            return Err(invalid(format!(
                "lattice with {} sites exceeds the {MAX_SITES}-site limit",
                self.sites()
            )));
        }
        Ok(())
    }
}

/// Occupation `α ∈ {0,1}^{L×H}` stored as a bit mask; site `(i, r)` is bit
/// `r·L + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeConfig {
    sticks: u16,
    height: u16,
    bits: u64,
}

impl LatticeConfig {
    pub fn from_bits(sticks: usize, height: usize, bits: u64) -> Self {
        debug_assert!(sticks * height <= MAX_SITES);
        debug_assert!(sticks * height == 64 || bits >> (sticks * height) == 0);
        LatticeConfig {
            sticks: sticks as u16,
            height: height as u16,
            bits,
        }
    }

    /// Build from a list of occupied `(stick, row)` pairs, both zero-based.
    pub fn from_sites(sticks: usize, height: usize, sites: &[(usize, usize)]) -> Self {
        let bits = sites
            .iter()
            .fold(0u64, |acc, &(i, r)| acc | 1u64 << (r * sticks + i));
        Self::from_bits(sticks, height, bits)
    }

    pub fn empty(sticks: usize, height: usize) -> Self {
        Self::from_bits(sticks, height, 0)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn sticks(&self) -> usize {
        self.sticks as usize
    }

    pub fn height(&self) -> usize {
        self.height as usize
    }

    pub fn occupied(&self, stick: usize, row: usize) -> bool {
        self.bits >> (row * self.sticks() + stick) & 1 == 1
    }

    pub fn particles(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Occupation of stick `i` from the bottom, as a bit mask over rows.
    pub fn stick_pattern(&self, stick: usize) -> u64 {
        (0..self.height()).fold(0, |acc, r| acc | (self.occupied(stick, r) as u64) << r)
    }

    pub fn stick_count(&self, stick: usize) -> usize {
        self.stick_pattern(stick).count_ones() as usize
    }

    /// Particle–hole exchange combined with the vertical flip.
    pub fn particle_hole(&self) -> Self {
        let (l, h) = (self.sticks(), self.height());
        let mut bits = 0u64;
        for r in 0..h {
            for i in 0..l {
                if !self.occupied(i, h - 1 - r) {
                    bits |= 1 << (r * l + i);
                }
            }
        }
        Self::from_bits(l, h, bits)
    }
}

/// Row sums `ω_h`, each in `[0, L]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct ProfileConfig(pub Vec<usize>);

impl ProfileConfig {
    pub fn heights(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}
