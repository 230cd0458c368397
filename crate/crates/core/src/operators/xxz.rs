use super::{CellGeometry, CsrMatrix, ReversibleOperator};
use crate::error::{invalid, Error, Result};
use crate::state_space::{EnsembleParams, DEFAULT_ENUMERATION_CAP};

/// `q = Δ − sqrt(Δ² − 1)`, the root in `(0, 1)` of `Δ = (q + q⁻¹)/2`.
pub fn q_of_delta(delta: f64) -> f64 {
    // 1 / (Δ + sqrt(Δ² − 1)) avoids cancellation for large Δ, the factored
    // radicand for Δ near 1
    1.0 / (delta + ((delta - 1.0) * (delta + 1.0)).sqrt())
}

pub fn delta_of_q(q: f64) -> f64 {
    0.5 * (q + 1.0 / q)
}

/// Spin-`S` kink chain of length `H` restricted to `S³_tot = n`.
///
/// Spins and the sector label are stored doubled so that half-integers are
/// exact.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct XXZParams {
    pub twice_s: usize,
    pub height: usize,
    pub delta: f64,
    pub sector_2n: i64,
}

/// Number of particles `N = S·cells + n` of the sector `2n`, checking range
/// and parity.
pub(crate) fn sector_particles(twice_s: usize, cells: usize, sector_2n: i64) -> Result<usize> {
    let total = (twice_s * cells) as i64;
    if sector_2n.abs() > total {
        return Err(Error::OutOfRange(format!(
            "sector 2n = {sector_2n} outside [−{total}, {total}]"
        )));
    }
    if (total + sector_2n) % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "sector 2n = {sector_2n} has the wrong parity for 2S·|cells| = {total}"
        )));
    }
    Ok(((total + sector_2n) / 2) as usize)
}

impl XXZParams {
    pub fn new(twice_s: usize, height: usize, delta: f64, sector_2n: i64) -> Result<Self> {
        let p = XXZParams {
            twice_s,
            height,
            delta,
            sector_2n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.twice_s == 0 {
            return Err(invalid("2S must be at least 1"));
        }
        if self.height < 2 {
            return Err(invalid("the chain needs H ≥ 2"));
        }
        if !(self.delta > 1.0) || !self.delta.is_finite() {
            return Err(invalid(format!("Δ = {} must exceed 1", self.delta)));
        }
        sector_particles(self.twice_s, self.height, self.sector_2n).map(|_| ())
    }

    pub fn spin(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn q(&self) -> f64 {
        q_of_delta(self.delta)
    }

    /// `N = S·H + n`.
    pub fn particles(&self) -> usize {
        sector_particles(self.twice_s, self.height, self.sector_2n).expect("validated sector")
    }

    /// The exclusion ensemble with `L = 2S` whose profile chain is unitarily
    /// equivalent to this sector.
    pub fn ensemble(&self) -> EnsembleParams {
        EnsembleParams {
            q: self.q(),
            sticks: self.twice_s,
            height: self.height,
            particles: self.particles(),
        }
    }

    /// All admissible `2n` for this `S` and `H`, ascending.
    pub fn sectors(twice_s: usize, height: usize) -> Vec<i64> {
        let total = (twice_s * height) as i64;
        (-total..=total).step_by(2).collect()
    }

    pub fn geometry(&self) -> CellGeometry {
        CellGeometry::chain(self.twice_s, self.height).expect("validated chain")
    }

    pub fn dim(&self) -> u128 {
        crate::combinatorics::BoundedCompositions::new(vec![self.twice_s; self.height], self.particles())
            .len()
    }
}

/// The kink Hamiltonian on the sector, in the basis of
/// [`crate::state_space::enumerate_profiles`] for [`XXZParams::ensemble`]
/// under `m_h = ω_h − S`.
pub fn xxz_chain_hamiltonian(xxz: &XXZParams) -> Result<CsrMatrix> {
    xxz.validate()?;
    xxz.geometry()
        .kink_hamiltonian(xxz.delta, xxz.particles(), DEFAULT_ENUMERATION_CAP)
}

/// The normalized kink ground state `ψ_n(m) ∝ Π_h q^{h m_h} sqrt(C(2S, S + m_h))`.
pub fn xxz_ground_state(xxz: &XXZParams) -> Result<Vec<f64>> {
    xxz.validate()?;
    xxz.geometry()
        .kink_ground_state(xxz.q(), xxz.particles(), DEFAULT_ENUMERATION_CAP)
}

/// `A(a, b) = H(a, b) · exp((w_b − w_a)/2)`, the conjugation by
/// `U φ = φ / sqrt(π)` with `π ∝ exp(w)`.
pub fn conjugate_by_weights(h: &CsrMatrix, log_weights: &[f64]) -> CsrMatrix {
    h.map_entries(|a, b, v| v * (0.5 * (log_weights[b] - log_weights[a])).exp())
}

/// A Hamiltonian conjugated to stochastic form and compared with the
/// independently assembled generator.
#[derive(Debug, Clone)]
pub struct Conjugation {
    /// Generator read off from the conjugated Hamiltonian, `−A / scale`.
    pub operator: ReversibleOperator,
    /// `max |A − (−scale·G)|` over all entries, diagonal included.
    pub residual: f64,
    /// The factor in `U ℋ U⁻¹ = −scale · G`.
    pub scale: f64,
}

pub(crate) fn conjugate_against(
    h: &CsrMatrix,
    generator: &ReversibleOperator,
    scale: f64,
    label: &str,
) -> Conjugation {
    let a = conjugate_by_weights(h, generator.log_pi());
    let mut expected = generator.rates().map_entries(|_, _, v| -scale * v);
    let n = generator.dim();
    let diag_rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = expected.row(i).collect();
            row.push((i, scale * generator.exit_rate(i)));
            row
        })
        .collect();
    expected = CsrMatrix::from_rows(n, diag_rows);
    let residual = a.max_abs_diff(&expected);
    let rows = (0..n)
        .map(|i| a.row(i).filter(|&(j, _)| j != i).map(|(j, v)| (j, -v / scale)).collect())
        .collect();
    Conjugation {
        operator: ReversibleOperator::from_rows(label, generator.log_pi().to_vec(), rows),
        residual,
        scale,
    }
}

/// `U_n ℋ U_n⁻¹ = −(S/Δ)·𝓛̂` with `U_n φ(ω) = φ(ω − S)/sqrt(ν̂(ω))`, checked
/// entrywise against [`super::profile_generator`] at `q(Δ)`, `L = 2S`.
pub fn conjugate_to_profile(xxz: &XXZParams) -> Result<Conjugation> {
    let h = xxz_chain_hamiltonian(xxz)?;
    let generator = super::profile_generator(&xxz.ensemble())?;
    Ok(conjugate_against(&h, &generator, xxz.spin() / xxz.delta, "conjugated-xxz"))
}
