use super::{CellGeometry, ReversibleOperator, SlotPairs};
use crate::error::{invalid, Result};
use crate::state_space::{EnsembleParams, DEFAULT_ENUMERATION_CAP};

/// The exclusion generator on the `L × H` box: each bond `(i,h)–(j,h+1)`
/// with differing occupancies swaps at rate `(1/L)·q^{α(i,h) − α(j,h+1)}`.
///
/// States are ordered as in [`crate::state_space::enumerate_lattice_configs`].
/// One-state sectors (`N = 0` or `N = LH`) give a one-state operator; the
/// spectral layer refuses them.
pub fn full_generator(params: &EnsembleParams) -> Result<ReversibleOperator> {
    full_generator_capped(params, DEFAULT_ENUMERATION_CAP)
}

pub fn full_generator_capped(params: &EnsembleParams, cap: u64) -> Result<ReversibleOperator> {
    params.validate()?;
    params.require_bitmask()?;
    let geom = CellGeometry::chain(params.sticks, params.height)?;
    geom.lattice_generator(
        params.q,
        params.particles,
        1.0 / params.sticks as f64,
        SlotPairs::All,
        "exclusion",
        cap,
    )
}

/// The generator of the modified form `D̃`: only bonds between distinct
/// sticks, `i ≠ j`. Requires `L ≥ 2`; for `L = 2` the form is not ergodic
/// (the parity of `h + i` is conserved), see [`modified_form_is_ergodic`].
pub fn modified_generator(params: &EnsembleParams) -> Result<ReversibleOperator> {
    modified_generator_capped(params, DEFAULT_ENUMERATION_CAP)
}

pub fn modified_generator_capped(params: &EnsembleParams, cap: u64) -> Result<ReversibleOperator> {
    params.validate()?;
    params.require_bitmask()?;
    if params.sticks < 2 {
        return Err(invalid("the modified form needs at least two sticks"));
    }
    let geom = CellGeometry::chain(params.sticks, params.height)?;
    geom.lattice_generator(
        params.q,
        params.particles,
        1.0 / params.sticks as f64,
        SlotPairs::Distinct,
        "modified-exclusion",
        cap,
    )
}

/// `D̃` is ergodic on every sector with `L ≥ 3`, and on `L = 2` only when the
/// sector is trivial or `H = 1`.
pub fn modified_form_is_ergodic(params: &EnsembleParams) -> bool {
    params.sticks >= 3 || params.height == 1 || params.is_degenerate()
}

/// The lumped generator on row profiles: `(1/L)·q⁻¹(L − ω_h)ω_{h+1}` for a
/// particle entering row `h` from above, `(1/L)·q(L − ω_{h+1})ω_h` for one
/// leaving it upwards. States are ordered as in
/// [`crate::state_space::enumerate_profiles`].
pub fn profile_generator(params: &EnsembleParams) -> Result<ReversibleOperator> {
    profile_generator_capped(params, DEFAULT_ENUMERATION_CAP)
}

pub fn profile_generator_capped(params: &EnsembleParams, cap: u64) -> Result<ReversibleOperator> {
    params.validate()?;
    let geom = CellGeometry::chain(params.sticks, params.height)?;
    geom.occupation_generator(params.q, params.particles, 1.0 / params.sticks as f64, "profile", cap)
}

/// `𝓓(f, f)` for the exclusion generator of `params`.
pub fn dirichlet_form(params: &EnsembleParams, f: &[f64]) -> Result<f64> {
    full_generator(params)?.dirichlet_form(f)
}

/// `D̃(f, f) = (1/L) Σ_i Σ_{j≠i} D_ij(f)`.
pub fn modified_dirichlet_form(params: &EnsembleParams, f: &[f64]) -> Result<f64> {
    modified_generator(params)?.dirichlet_form(f)
}

/// Exclusion on the complete graph with `L` sites and `N` particles, uniform
/// stationary law, each unordered pair exchanging at rate `2/L`, so that its
/// Dirichlet form is `(1/L) Σ_i Σ_{j≠i} ½ν[(∇_ij f)²]`.
pub fn bernoulli_laplace(sites: usize, particles: usize) -> Result<ReversibleOperator> {
    if sites < 2 || particles == 0 || particles >= sites {
        return Err(invalid(format!(
            "Bernoulli–Laplace needs 1 ≤ N ≤ L − 1, got L = {sites}, N = {particles}"
        )));
    }
    let basis = crate::state_space::BitSector::new(sites, particles, DEFAULT_ENUMERATION_CAP)?;
    let rate = 2.0 / sites as f64;
    let rows = basis
        .iter()
        .map(|bits| {
            let mut row = Vec::new();
            for i in 0..sites {
                for j in (i + 1)..sites {
                    if (bits >> i & 1) != (bits >> j & 1) {
                        row.push((basis.rank(bits ^ (1 << i) ^ (1 << j)), rate));
                    }
                }
            }
            row
        })
        .collect();
    Ok(ReversibleOperator::from_rows(
        "bernoulli-laplace",
        vec![0.0; basis.len()],
        rows,
    ))
}
