//! Layered cell geometries shared by the exclusion chain and the diagonal
//! interface model.
//!
//! A geometry is a set of cells, each holding `capacity` slots and sitting at
//! an integer level, plus bonds `(lower, upper)` joining cells whose levels
//! differ by one. A particle in a cell at level `ℓ` carries weight `q^{2ℓ}`.
//! Moving a particle from `lower` to `upper` has rate `q` per slot pair and the
//! reverse move `q⁻¹`, times a model-dependent prefactor.

use super::{CsrMatrix, ReversibleOperator};
use crate::combinatorics::{ln_binomial, BoundedCompositions};
use crate::error::{invalid, Error, Result};
use crate::state_space::BitSector;

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    capacity: usize,
    levels: Vec<usize>,
    bonds: Vec<(usize, usize)>,
}

/// Which slot pairs of a bond may exchange in the lattice picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotPairs {
    All,
    /// Only slots `i ≠ j`; for the chain these are the inter-stick bonds.
    Distinct,
}

impl CellGeometry {
    pub fn new(capacity: usize, levels: Vec<usize>, bonds: Vec<(usize, usize)>) -> Result<Self> {
        if capacity == 0 {
            return Err(invalid("cell capacity must be positive"));
        }
        for &(x, y) in &bonds {
            if x >= levels.len() || y >= levels.len() {
                return Err(invalid(format!("bond ({x}, {y}) references a missing cell")));
            }
            if levels[y] != levels[x] + 1 {
                return Err(invalid(format!("bond ({x}, {y}) does not raise the level by one")));
            }
        }
        Ok(CellGeometry {
            capacity,
            levels,
            bonds,
        })
    }

    /// Rows `h = 1..=H` of an `L`-wide rectangle, bonded to their neighbours.
    pub fn chain(sticks: usize, height: usize) -> Result<Self> {
        let bonds = (1..height).map(|r| (r - 1, r)).collect();
        Self::new(sticks, (1..=height).collect(), bonds)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn cells(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn sites(&self) -> usize {
        self.capacity * self.cells()
    }

    fn check_particles(&self, particles: usize) -> Result<()> {
        if particles > self.sites() {
            return Err(invalid(format!(
                "{particles} particles exceed the {} available slots",
                self.sites()
            )));
        }
        Ok(())
    }

    /// Lattice basis: bit `cell·capacity + slot`, colex order.
    pub fn lattice_basis(&self, particles: usize, cap: u64) -> Result<BitSector> {
        self.check_particles(particles)?;
        BitSector::new(self.sites(), particles, cap)
    }

    /// Occupation basis `ω ∈ [0, capacity]^cells` with `Σ ω = particles`.
    pub fn occupation_basis(&self, particles: usize, cap: u64) -> Result<BoundedCompositions> {
        self.check_particles(particles)?;
        let comps = BoundedCompositions::new(vec![self.capacity; self.cells()], particles);
        if comps.len() > cap as u128 {
            return Err(Error::CapExceeded {
                size: comps.len(),
                cap,
            });
        }
        Ok(comps)
    }

    pub fn lattice_log_weight(&self, bits: u64, ln_q: f64) -> f64 {
        let mut acc = 0.0;
        let mut b = bits;
        while b != 0 {
            let site = b.trailing_zeros() as usize;
            acc += 2.0 * self.levels[site / self.capacity] as f64 * ln_q;
            b &= b - 1;
        }
        acc
    }

    /// `ln Π_c C(capacity, ω_c) q^{2 ℓ_c ω_c}`.
    pub fn occupation_log_weight(&self, omega: &[usize], ln_q: f64) -> f64 {
        omega
            .iter()
            .zip(&self.levels)
            .map(|(&w, &l)| {
                ln_binomial(self.capacity as u64, w as u64) + 2.0 * l as f64 * w as f64 * ln_q
            })
            .sum()
    }

    /// Exclusion dynamics on the slots: a particle and a hole on the two ends
    /// of a bond swap with rate `prefactor·q` (upward) or `prefactor·q⁻¹`.
    pub fn lattice_generator(
        &self,
        q: f64,
        particles: usize,
        prefactor: f64,
        pairs: SlotPairs,
        label: &str,
        cap: u64,
    ) -> Result<ReversibleOperator> {
        let basis = self.lattice_basis(particles, cap)?;
        let ln_q = q.ln();
        let c = self.capacity;
        let (up, down) = (prefactor * q, prefactor / q);
        let mut log_w = Vec::with_capacity(basis.len());
        let mut rows = Vec::with_capacity(basis.len());
        for bits in basis.iter() {
            log_w.push(self.lattice_log_weight(bits, ln_q));
            let mut row = Vec::new();
            for &(x, y) in &self.bonds {
                for i in 0..c {
                    let sx = x * c + i;
                    let ox = bits >> sx & 1;
                    for j in 0..c {
                        if pairs == SlotPairs::Distinct && i == j {
                            continue;
                        }
                        let sy = y * c + j;
                        let oy = bits >> sy & 1;
                        if ox == oy {
                            continue;
                        }
                        let target = bits ^ (1 << sx) ^ (1 << sy);
                        let rate = if ox == 1 { up } else { down };
                        row.push((basis.rank(target), rate));
                    }
                }
            }
            rows.push(row);
        }
        Ok(ReversibleOperator::from_rows(label, log_w, rows))
    }

    /// The lumped dynamics of [`Self::lattice_generator`] on occupation numbers:
    /// `prefactor·q·ω_x(c − ω_y)` upward and `prefactor·q⁻¹·ω_y(c − ω_x)` downward
    /// across each bond `(x, y)`.
    pub fn occupation_generator(
        &self,
        q: f64,
        particles: usize,
        prefactor: f64,
        label: &str,
        cap: u64,
    ) -> Result<ReversibleOperator> {
        let basis = self.occupation_basis(particles, cap)?;
        let states = basis.to_vec();
        let ln_q = q.ln();
        let c = self.capacity;
        let mut log_w = Vec::with_capacity(states.len());
        let mut rows = Vec::with_capacity(states.len());
        let mut scratch = vec![0usize; self.cells()];
        for omega in &states {
            log_w.push(self.occupation_log_weight(omega, ln_q));
            let mut row = Vec::new();
            for &(x, y) in &self.bonds {
                let (wx, wy) = (omega[x], omega[y]);
                let rate_up = prefactor * q * (wx * (c - wy)) as f64;
                if rate_up > 0.0 {
                    scratch.copy_from_slice(omega);
                    scratch[x] -= 1;
                    scratch[y] += 1;
                    row.push((basis.rank(&scratch)? as usize, rate_up));
                }
                let rate_down = prefactor / q * (wy * (c - wx)) as f64;
                if rate_down > 0.0 {
                    scratch.copy_from_slice(omega);
                    scratch[x] += 1;
                    scratch[y] -= 1;
                    row.push((basis.rank(&scratch)? as usize, rate_down));
                }
            }
            rows.push(row);
        }
        Ok(ReversibleOperator::from_rows(label, log_w, rows))
    }

    /// Spin `S = capacity/2` Hamiltonian with kink boundary terms, one
    /// two-site term per bond, on the occupation basis with `m = ω − S`.
    ///
    /// Per bond `(x, y)`: diagonal `S² − m_x m_y + S√(1−Δ⁻²)(m_y − m_x)` and
    /// off-diagonal `−(2Δ)⁻¹ c₊(S, m_x) c₋(S, m_y)` for the move raising `m_x`.
    pub fn kink_hamiltonian(&self, delta: f64, particles: usize, cap: u64) -> Result<CsrMatrix> {
        if !(delta > 1.0) {
            return Err(invalid(format!("Δ = {delta} must exceed 1")));
        }
        let basis = self.occupation_basis(particles, cap)?;
        let states = basis.to_vec();
        let s = self.capacity as f64 / 2.0;
        let field = s * (1.0 - delta.powi(-2)).sqrt();
        let hop = -0.5 / delta;
        let mut rows = Vec::with_capacity(states.len());
        let mut scratch = vec![0usize; self.cells()];
        for (a, omega) in states.iter().enumerate() {
            let mut row = Vec::new();
            let mut diag = 0.0;
            for &(x, y) in &self.bonds {
                let mx = omega[x] as f64 - s;
                let my = omega[y] as f64 - s;
                diag += s * s - mx * my + field * (my - mx);
                let amp = hop * c_plus(s, mx) * c_minus(s, my);
                if amp != 0.0 {
                    scratch.copy_from_slice(omega);
                    scratch[x] += 1;
                    scratch[y] -= 1;
                    row.push((basis.rank(&scratch)? as usize, amp));
                }
                let amp = hop * c_minus(s, mx) * c_plus(s, my);
                if amp != 0.0 {
                    scratch.copy_from_slice(omega);
                    scratch[x] -= 1;
                    scratch[y] += 1;
                    row.push((basis.rank(&scratch)? as usize, amp));
                }
            }
            row.push((a, diag));
            rows.push(row);
        }
        Ok(CsrMatrix::from_rows(states.len(), rows))
    }

    /// `ψ(m) = Π_x q^{ℓ_x m_x} sqrt(C(2S, S + m_x))`, unit Euclidean norm.
    pub fn kink_ground_state(&self, q: f64, particles: usize, cap: u64) -> Result<Vec<f64>> {
        let basis = self.occupation_basis(particles, cap)?;
        let s = self.capacity as f64 / 2.0;
        let ln_q = q.ln();
        let log_psi: Vec<f64> = basis
            .to_vec()
            .iter()
            .map(|omega| {
                omega
                    .iter()
                    .zip(&self.levels)
                    .map(|(&w, &l)| {
                        l as f64 * (w as f64 - s) * ln_q
                            + 0.5 * ln_binomial(self.capacity as u64, w as u64)
                    })
                    .sum()
            })
            .collect();
        let max = log_psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut psi: Vec<f64> = log_psi.iter().map(|l| (l - max).exp()).collect();
        let norm = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|v| *v /= norm);
        Ok(psi)
    }
}

/// `c₊(S, m) = sqrt((S − m)(S + m + 1))`, the raising amplitude.
pub fn c_plus(s: f64, m: f64) -> f64 {
    ((s - m) * (s + m + 1.0)).max(0.0).sqrt()
}

/// `c₋(S, m) = sqrt((S + m)(S − m + 1))`, the lowering amplitude.
pub fn c_minus(s: f64, m: f64) -> f64 {
    ((s + m) * (s - m + 1.0)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonds_must_raise_level() {
        assert!(CellGeometry::new(1, vec![1, 3], vec![(0, 1)]).is_err());
        assert!(CellGeometry::new(1, vec![1, 2], vec![(0, 2)]).is_err());
        assert!(CellGeometry::new(0, vec![1], vec![]).is_err());
        let g = CellGeometry::chain(3, 4).unwrap();
        assert_eq!(g.bonds(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.sites(), 12);
    }

    #[test]
    fn ladder_amplitudes() {
        assert_eq!(c_plus(0.5, 0.5), 0.0);
        assert_eq!(c_minus(0.5, -0.5), 0.0);
        assert_eq!(c_plus(0.5, -0.5), 1.0);
        assert!((c_plus(1.0, 0.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distinct_slots_drop_vertical_moves() {
        let g = CellGeometry::chain(2, 2).unwrap();
        let all = g.lattice_generator(0.5, 1, 0.5, SlotPairs::All, "all", 1 << 20).unwrap();
        let distinct = g
            .lattice_generator(0.5, 1, 0.5, SlotPairs::Distinct, "distinct", 1 << 20)
            .unwrap();
        assert_eq!(all.rates().nnz(), 8);
        assert_eq!(distinct.rates().nnz(), 4);
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let g = CellGeometry::new(3, vec![1, 2, 2, 3], vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        for n in 0..=12 {
            let h = g.kink_hamiltonian(1.7, n, 1 << 20).unwrap();
            assert!(h.asymmetry() < 1e-14);
        }
        assert!(g.kink_hamiltonian(1.0, 3, 1 << 20).is_err());
    }
}
