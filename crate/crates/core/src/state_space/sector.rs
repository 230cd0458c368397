use super::{EnsembleParams, LatticeConfig, ProfileConfig, DEFAULT_ENUMERATION_CAP};
use crate::combinatorics::{
    binomial, colex_rank, colex_unrank, next_same_weight, BinomialTable, BoundedCompositions,
    MAX_SITES,
};
use crate::error::{invalid, Error, Result};

/// All bit masks over `sites` positions with exactly `weight` bits, in colex
/// order.
#[derive(Debug, Clone)]
pub struct BitSector {
    sites: usize,
    weight: usize,
    len: u64,
    table: BinomialTable,
}

impl BitSector {
    pub fn new(sites: usize, weight: usize, cap: u64) -> Result<Self> {
        if sites > MAX_SITES {
            return Err(invalid(format!("{sites} sites exceed the {MAX_SITES}-site limit")));
        }
        if weight > sites {
            return Err(invalid(format!("{weight} particles on {sites} sites")));
        }
        let size = binomial(sites as u64, weight as u64);
        if size > cap as u128 {
            return Err(Error::CapExceeded { size, cap });
        }
        Ok(BitSector {
            sites,
            weight,
            len: size as u64,
            table: BinomialTable::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    #[inline]
    pub fn rank(&self, bits: u64) -> usize {
        colex_rank(&self.table, bits) as usize
    }

    #[inline]
    pub fn unrank(&self, rank: usize) -> u64 {
        colex_unrank(&self.table, rank as u64, self.weight)
    }

    /// Masks in rank order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let first = if self.weight == 0 {
            0
        } else if self.weight == 64 {
            u64::MAX
        } else {
            (1u64 << self.weight) - 1
        };
        let n = self.len;
        let mut cur = Some(first);
        (0..n).map(move |_| {
            let b = cur.expect("colex walk ended early");
            cur = if self.weight == 0 { None } else { next_same_weight(b) };
            b
        })
    }
}

/// The canonical sector of an [`EnsembleParams`]: configurations with exactly
/// `N` particles, ordered colexicographically on the occupied site indices.
#[derive(Debug, Clone)]
pub struct LatticeSector {
    params: EnsembleParams,
    bits: BitSector,
}

impl LatticeSector {
    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit_sector(&self) -> &BitSector {
        &self.bits
    }

    pub fn config(&self, rank: usize) -> LatticeConfig {
        LatticeConfig::from_bits(self.params.sticks, self.params.height, self.bits.unrank(rank))
    }

    pub fn rank(&self, alpha: &LatticeConfig) -> Result<usize> {
        if alpha.sticks() != self.params.sticks
            || alpha.height() != self.params.height
            || alpha.particles() != self.params.particles
        {
            return Err(invalid("configuration does not belong to this sector"));
        }
        Ok(self.bits.rank(alpha.bits()))
    }

    pub fn iter(&self) -> impl Iterator<Item = LatticeConfig> + '_ {
        let (l, h) = (self.params.sticks, self.params.height);
        self.bits.iter().map(move |b| LatticeConfig::from_bits(l, h, b))
    }

    pub fn to_vec(&self) -> Vec<LatticeConfig> {
        self.iter().collect()
    }
}

/// Enumerate the canonical lattice sector, refusing sectors above `cap`.
pub fn enumerate_lattice_configs(params: &EnsembleParams, cap: Option<u64>) -> Result<LatticeSector> {
    params.validate()?;
    params.require_bitmask()?;
    let bits = BitSector::new(
        params.sites(),
        params.particles,
        cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
    )?;
    Ok(LatticeSector {
        params: *params,
        bits,
    })
}

/// Profiles `ω ∈ [0, L]^H` with `Σ ω_h = N`.
#[derive(Debug, Clone)]
pub struct ProfileSector {
    params: EnsembleParams,
    comps: BoundedCompositions,
}

impl ProfileSector {
    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.comps.len() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn config(&self, rank: usize) -> ProfileConfig {
        ProfileConfig(self.comps.unrank(rank as u64))
    }

    pub fn rank(&self, omega: &ProfileConfig) -> Result<usize> {
        self.comps.rank(&omega.0).map(|r| r as usize)
    }

    pub fn to_vec(&self) -> Vec<ProfileConfig> {
        self.comps.to_vec().into_iter().map(ProfileConfig).collect()
    }

    pub fn compositions(&self) -> &BoundedCompositions {
        &self.comps
    }
}

pub fn enumerate_profiles(params: &EnsembleParams, cap: Option<u64>) -> Result<ProfileSector> {
    params.validate()?;
    let comps = BoundedCompositions::new(vec![params.sticks; params.height], params.particles);
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    if comps.len() > cap as u128 {
        return Err(Error::CapExceeded {
            size: comps.len(),
            cap,
        });
    }
    Ok(ProfileSector {
        params: *params,
        comps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: usize, h: usize, n: usize) -> EnsembleParams {
        EnsembleParams::new(0.5, l, h, n).unwrap()
    }

    #[test]
    fn lattice_sector_sizes() {
        assert_eq!(enumerate_lattice_configs(&p(2, 2, 2), None).unwrap().len(), 6);
        let s = enumerate_lattice_configs(&p(1, 2, 1), None).unwrap();
        let v = s.to_vec();
        assert_eq!(v.len(), 2);
        // colex on site index: bottom site first
        assert!(v[0].occupied(0, 0));
        assert!(v[1].occupied(0, 1));
    }

    #[test]
    fn lattice_rank_roundtrip_l3_h3_n4() {
        let s = enumerate_lattice_configs(&p(3, 3, 4), None).unwrap();
        assert_eq!(s.len(), 126);
        for (k, a) in s.iter().enumerate() {
            assert_eq!(a.particles(), 4);
            assert_eq!(s.rank(&a).unwrap(), k);
            assert_eq!(s.config(k), a);
        }
    }

    #[test]
    fn lattice_cap_and_invalid() {
        let err = enumerate_lattice_configs(&p(4, 4, 8), Some(1000)).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { size: 12870, .. }));
        assert!(EnsembleParams::new(0.5, 2, 2, 5).is_err());
        assert!(EnsembleParams::new(1.0, 2, 2, 1).is_err());
        assert!(enumerate_lattice_configs(&p(8, 9, 1), None).is_err());
    }

    #[test]
    fn degenerate_sectors_have_one_state() {
        assert_eq!(enumerate_lattice_configs(&p(2, 2, 0), None).unwrap().len(), 1);
        assert_eq!(enumerate_lattice_configs(&p(2, 2, 4), None).unwrap().len(), 1);
        assert_eq!(enumerate_profiles(&p(2, 2, 4), None).unwrap().len(), 1);
    }

    #[test]
    fn profiles_small() {
        let s = enumerate_profiles(&p(1, 2, 1), None).unwrap();
        assert_eq!(s.to_vec(), vec![ProfileConfig(vec![1, 0]), ProfileConfig(vec![0, 1])]);
        let s = enumerate_profiles(&p(2, 2, 2), None).unwrap();
        assert_eq!(
            s.to_vec(),
            vec![
                ProfileConfig(vec![2, 0]),
                ProfileConfig(vec![1, 1]),
                ProfileConfig(vec![0, 2])
            ]
        );
    }

    #[test]
    fn profiles_l2_h3_n3_brute_force() {
        let brute = (0..3usize.pow(3))
            .map(|k| [k % 3, k / 3 % 3, k / 9])
            .filter(|w| w.iter().sum::<usize>() == 3)
            .count();
        assert_eq!(brute, 7);
        let s = enumerate_profiles(&p(2, 3, 3), None).unwrap();
        assert_eq!(s.len(), brute);
        for (k, w) in s.to_vec().iter().enumerate() {
            assert_eq!(s.rank(w).unwrap(), k);
        }
    }
}
