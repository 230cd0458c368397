use super::dense::symmetric_eigen;
use super::lanczos::{lowest_eigenpair, LanczosOptions};
use super::{DENSE_CAP, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::operators::{
    conjugate_to_profile, diagonal_conjugation, diagonal_ground_state, diagonal_hamiltonian,
    xxz_chain_hamiltonian, xxz_ground_state, CsrMatrix, DiagonalRegion, XXZParams,
};

/// First excitation of a kink Hamiltonian in one sector, plus the
/// entrywise deviation of its conjugation from the stochastic generator.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HamiltonianGap {
    pub dim: usize,
    /// Ground-state energy, `0` up to rounding.
    pub ground_energy: f64,
    /// `NaN` on one-state sectors.
    pub gap: f64,
    pub equivalence_residual: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue of `h` above the zero-energy ground state `ground`.
pub fn hamiltonian_gap(h: &CsrMatrix, ground: &[f64], opts: &LanczosOptions) -> Result<(f64, f64, usize)> {
    let n = h.nrows();
    let e0 = {
        let hv = h.mul_vec(ground);
        ground.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>()
    };
    if n < 2 {
        return Ok((e0, f64::NAN, 0));
    }
    if n <= DENSE_CAP {
        let (vals, _) = symmetric_eigen(h.to_dense());
        let gap = vals.iter().copied().find(|&v| v >= ZERO_THRESHOLD).unwrap_or(f64::NAN);
        return Ok((e0, gap, 0));
    }
    let r = lowest_eigenpair(n, |x, y| h.mul_vec_into(x, y), &[ground.to_vec()], opts)?;
    Ok((e0, r.value, r.matvecs))
}

pub fn xxz_gap(xxz: &XXZParams, opts: &LanczosOptions) -> Result<HamiltonianGap> {
    let h = xxz_chain_hamiltonian(xxz)?;
    let psi = xxz_ground_state(xxz)?;
    let (ground_energy, gap, iterations) = hamiltonian_gap(&h, &psi, opts)?;
    Ok(HamiltonianGap {
        dim: h.nrows(),
        ground_energy,
        gap,
        equivalence_residual: conjugate_to_profile(xxz)?.residual,
        iterations,
    })
}

pub fn diagonal_gap(
    region: &DiagonalRegion,
    twice_s: usize,
    delta: f64,
    sector_2n: i64,
    opts: &LanczosOptions,
) -> Result<HamiltonianGap> {
    let h = diagonal_hamiltonian(region, twice_s, delta, sector_2n)?;
    let psi = diagonal_ground_state(region, twice_s, delta, sector_2n)?;
    let (ground_energy, gap, iterations) = hamiltonian_gap(&h, &psi, opts)?;
    Ok(HamiltonianGap {
        dim: h.nrows(),
        ground_energy,
        gap,
        equivalence_residual: diagonal_conjugation(region, twice_s, delta, sector_2n)?.residual,
        iterations,
    })
}

/// Smallest gap over the sectors with more than one state.
pub fn xxz_min_gap(twice_s: usize, height: usize, delta: f64, opts: &LanczosOptions) -> Result<f64> {
    let mut best = f64::INFINITY;
    for n2 in XXZParams::sectors(twice_s, height) {
        let g = xxz_gap(&XXZParams::new(twice_s, height, delta, n2)?, opts)?;
        if g.dim > 1 {
            best = best.min(g.gap);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::DegenerateSector)
    }
}

pub fn diagonal_min_gap(region: &DiagonalRegion, twice_s: usize, delta: f64, opts: &LanczosOptions) -> Result<f64> {
    let mut best = f64::INFINITY;
    for n2 in region.sectors(twice_s) {
        let g = diagonal_gap(region, twice_s, delta, n2, opts)?;
        if g.dim > 1 {
            best = best.min(g.gap);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::DegenerateSector)
    }
}
