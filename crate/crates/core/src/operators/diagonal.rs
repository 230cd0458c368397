use super::xxz::{conjugate_against, q_of_delta, sector_particles, Conjugation};
use super::{CellGeometry, CsrMatrix, ReversibleOperator, SlotPairs};
use crate::error::{invalid, Result};
use crate::state_space::DEFAULT_ENUMERATION_CAP;

/// The region `Γ_{R,H} = {x ∈ ℤ² : |x₁ − x₂| ≤ R, 1 ≤ x₁ + x₂ ≤ H}` with
/// level `ℓ_x = x₁ + x₂`, tilt `t_x = x₁ − x₂`, and the bonds `x → x + e₁`,
/// `x → x + e₂` that stay inside.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagonalRegion {
    pub half_width: usize,
    pub height: usize,
    pub sites: Vec<(i64, i64)>,
    /// Pairs of site indices `(x, y)` with `ℓ_y = ℓ_x + 1`.
    pub bonds: Vec<(usize, usize)>,
}

impl DiagonalRegion {
    pub fn new(half_width: usize, height: usize) -> Result<Self> {
        if height == 0 {
            return Err(invalid("H must be at least 1"));
        }
        let r = half_width as i64;
        let mut sites = Vec::new();
        for level in 1..=height as i64 {
            for t in -r..=r {
                if (level + t).rem_euclid(2) == 0 {
                    sites.push(((level + t) / 2, (level - t) / 2));
                }
            }
        }
        let index = |p: (i64, i64)| sites.iter().position(|&s| s == p);
        let mut bonds = Vec::new();
        for (k, &(x1, x2)) in sites.iter().enumerate() {
            for next in [(x1 + 1, x2), (x1, x2 + 1)] {
                if let Some(j) = index(next) {
                    bonds.push((k, j));
                }
            }
        }
        Ok(DiagonalRegion {
            half_width,
            height,
            sites,
            bonds,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn level(&self, k: usize) -> usize {
        (self.sites[k].0 + self.sites[k].1) as usize
    }

    pub fn tilt(&self, k: usize) -> i64 {
        self.sites[k].0 - self.sites[k].1
    }

    /// Cells are sites, each holding `2S` slots.
    pub fn geometry(&self, twice_s: usize) -> Result<CellGeometry> {
        CellGeometry::new(
            twice_s,
            (0..self.len()).map(|k| self.level(k)).collect(),
            self.bonds.clone(),
        )
    }

    /// `N = S|Γ| + n` for the sector `2n`.
    pub fn particles(&self, twice_s: usize, sector_2n: i64) -> Result<usize> {
        sector_particles(twice_s, self.len(), sector_2n)
    }

    /// All admissible `2n`, ascending.
    pub fn sectors(&self, twice_s: usize) -> Vec<i64> {
        let total = (twice_s * self.len()) as i64;
        (-total..=total).step_by(2).collect()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 1.0) || !delta.is_finite() {
        return Err(invalid(format!("Δ = {delta} must exceed 1")));
    }
    Ok(())
}

/// Kink Hamiltonian on `Γ_{R,H}`, one two-site term per bond, in the
/// occupation basis `ω = m + S`.
pub fn diagonal_hamiltonian(
    region: &DiagonalRegion,
    twice_s: usize,
    delta: f64,
    sector_2n: i64,
) -> Result<CsrMatrix> {
    check_delta(delta)?;
    let n = region.particles(twice_s, sector_2n)?;
    region
        .geometry(twice_s)?
        .kink_hamiltonian(delta, n, DEFAULT_ENUMERATION_CAP)
}

/// `ψ_{Γ,n}(m) ∝ Π_x q^{ℓ_x m_x} sqrt(C(2S, S + m_x))`, normalized.
pub fn diagonal_ground_state(
    region: &DiagonalRegion,
    twice_s: usize,
    delta: f64,
    sector_2n: i64,
) -> Result<Vec<f64>> {
    check_delta(delta)?;
    let n = region.particles(twice_s, sector_2n)?;
    region
        .geometry(twice_s)?
        .kink_ground_state(q_of_delta(delta), n, DEFAULT_ENUMERATION_CAP)
}

/// `Ĝ_{R,S}` on `ω ∈ [0, 2S]^Γ` with `Σ ω = N`: across a bond `(x, y)`,
/// `q⁻¹ ω_y (2S − ω_x)` for a particle entering `x` and `q ω_x (2S − ω_y)`
/// for one leaving it.
pub fn diagonal_profile_generator(
    region: &DiagonalRegion,
    twice_s: usize,
    delta: f64,
    particles: usize,
) -> Result<ReversibleOperator> {
    check_delta(delta)?;
    region.geometry(twice_s)?.occupation_generator(
        q_of_delta(delta),
        particles,
        1.0,
        "diagonal-profile",
        DEFAULT_ENUMERATION_CAP,
    )
}

/// `G_{R,S}`: each site of `Γ` split into `2S` slots, every slot pair across
/// a bond exchanging with rate `q^{±1}/(2S)`.
pub fn lifted_diagonal_generator(
    region: &DiagonalRegion,
    twice_s: usize,
    delta: f64,
    particles: usize,
) -> Result<ReversibleOperator> {
    check_delta(delta)?;
    region.geometry(twice_s)?.lattice_generator(
        q_of_delta(delta),
        particles,
        1.0 / twice_s as f64,
        SlotPairs::All,
        "lifted-diagonal",
        DEFAULT_ENUMERATION_CAP,
    )
}

/// `U ℋ_R U⁻¹ = −(2Δ)⁻¹ Ĝ_{R,S}`, checked entrywise.
pub fn diagonal_conjugation(
    region: &DiagonalRegion,
    twice_s: usize,
    delta: f64,
    sector_2n: i64,
) -> Result<Conjugation> {
    let h = diagonal_hamiltonian(region, twice_s, delta, sector_2n)?;
    let n = region.particles(twice_s, sector_2n)?;
    let g = diagonal_profile_generator(region, twice_s, delta, n)?;
    Ok(conjugate_against(&h, &g, 0.5 / delta, "conjugated-diagonal"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::BoundedCompositions;

    #[test]
    fn small_region() {
        let g = DiagonalRegion::new(1, 2).unwrap();
        assert_eq!(g.sites, vec![(0, 1), (1, 0), (1, 1)]);
        assert_eq!(g.bonds, vec![(0, 2), (1, 2)]);
        for &(x, y) in &g.bonds {
            assert_eq!(g.level(y), g.level(x) + 1);
        }
    }

    #[test]
    fn zero_width_region_is_the_even_diagonal() {
        for h in 1..8 {
            let g = DiagonalRegion::new(0, h).unwrap();
            assert_eq!(g.len(), h / 2);
            assert!(g.sites.iter().all(|&(a, b)| a == b));
            assert!(g.bonds.is_empty());
        }
    }

    #[test]
    fn levels_and_tilts_in_range() {
        for r in 0..4 {
            for h in 1..6 {
                let g = DiagonalRegion::new(r, h).unwrap();
                for k in 0..g.len() {
                    assert!((1..=h).contains(&g.level(k)));
                    assert!(g.tilt(k).unsigned_abs() as usize <= r);
                }
                for &(x, y) in &g.bonds {
                    assert_eq!(g.level(y), g.level(x) + 1);
                    let (a, b) = (g.sites[x], g.sites[y]);
                    assert_eq!((b.0 - a.0) + (b.1 - a.1), 1);
                }
            }
        }
    }

    #[test]
    fn ground_states_are_annihilated() {
        for &(r, h, ts) in &[(1, 2, 1), (1, 3, 1), (2, 3, 1), (1, 3, 2)] {
            let g = DiagonalRegion::new(r, h).unwrap();
            for n2 in g.sectors(ts) {
                let ham = diagonal_hamiltonian(&g, ts, 1.7, n2).unwrap();
                assert!(ham.asymmetry() < 1e-14);
                let psi = diagonal_ground_state(&g, ts, 1.7, n2).unwrap();
                let hpsi = ham.mul_vec(&psi);
                assert!(hpsi.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10);
            }
        }
    }

    #[test]
    fn conjugation_residual_small() {
        for &(r, h, ts) in &[(1, 2, 1), (2, 3, 1), (1, 3, 2)] {
            let g = DiagonalRegion::new(r, h).unwrap();
            for n2 in g.sectors(ts) {
                let c = diagonal_conjugation(&g, ts, 1.25, n2).unwrap();
                assert!(c.residual < 1e-10);
                assert!(c.operator.check().passes(1e-10));
            }
        }
    }

    #[test]
    fn lifted_generator_lumps_to_profile() {
        // (2S)·G on site-symmetric functions equals Ĝ
        let g = DiagonalRegion::new(1, 3).unwrap();
        let ts = 2;
        let geom = g.geometry(ts).unwrap();
        for n in 1..geom.sites() {
            let lifted = lifted_diagonal_generator(&g, ts, 1.5, n).unwrap().scaled(ts as f64);
            let hat = diagonal_profile_generator(&g, ts, 1.5, n).unwrap();
            assert!(lifted.check().passes(1e-12) && hat.check().passes(1e-12));
            let comps = BoundedCompositions::new(vec![ts; g.len()], n);
            let basis = geom.lattice_basis(n, 1 << 20).unwrap();
            let occupation = |bits: u64| -> Vec<usize> {
                (0..g.len())
                    .map(|c| ((bits >> (c * ts)) & ((1 << ts) - 1)).count_ones() as usize)
                    .collect()
            };
            let fhat: Vec<f64> = (0..hat.dim()).map(|k| (k as f64).sin()).collect();
            let f: Vec<f64> = basis
                .iter()
                .map(|b| fhat[comps.rank(&occupation(b)).unwrap() as usize])
                .collect();
            let lf = lifted.apply(&f).unwrap();
            let lfhat = hat.apply(&fhat).unwrap();
            for (k, b) in basis.iter().enumerate() {
                let r = comps.rank(&occupation(b)).unwrap() as usize;
                assert!((lf[k] - lfhat[r]).abs() < 1e-12);
            }
        }
    }
}
