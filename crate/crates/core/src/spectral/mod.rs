//! Spectral gaps, relaxation times and the variational constants of the
//! exclusion process and its auxiliary operators.

mod blocks;
mod dense;
mod hamiltonian;
mod kspec;
mod lanczos;
mod recursion;
mod scan;

pub use blocks::{block_gap, block_spectrum, exchange_blocks, BlockGap, ExchangeBlock, BLOCK_DENSE_LIMIT};
pub use dense::{dense_gap, dense_gap_capped, symmetric_eigen, symmetric_spectrum, symmetrize};
pub use hamiltonian::{
    diagonal_gap, diagonal_min_gap, hamiltonian_gap, xxz_gap, xxz_min_gap, HamiltonianGap,
};
pub use kspec::{k_spectrum_report, w_constant, KSpectrumReport, WConstant};
pub use lanczos::{lowest_eigenpair, LanczosOptions, LanczosResult, LANCZOS_SEED};
pub use recursion::{
    gamma_tilde, identity_checks, recursion_check, recursion_report, CheckOutcome, RecursionReport, RECURSION_SEED,
};
pub use scan::{
    gamma_scan, sector_gap, Form, GammaSummary, ScanCell, ScanMethod, ScanOptions, ScanTable,
};

use crate::error::{Error, Result};
use crate::operators::ReversibleOperator;

/// Eigenvalues below this are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-9;

/// Largest dimension handed to the dense solver by default.
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
    Blocks,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Iterative => "iterative",
            Method::Blocks => "blocks",
        }
    }
}

/// Spectrum of `−G` for a reversible generator `G`.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Ascending; the whole spectrum for dense solves, only the gap otherwise.
    pub eigenvalues: Vec<f64>,
    /// Smallest eigenvalue above [`ZERO_THRESHOLD`].
    pub gap: f64,
    pub method: Method,
    /// `‖Av − λv‖ / ‖v‖` for the gap eigenpair of the symmetrized operator.
    pub residual: f64,
    pub iterations: usize,
    /// Number of eigenvalues below [`ZERO_THRESHOLD`]; more than one means
    /// the operator is reducible. Zero when unknown (iterative solves).
    pub zero_multiplicity: usize,
    /// Gap eigenfunction on the state space, `π`-orthogonal to constants.
    pub eigenvector: Option<Vec<f64>>,
}

impl SpectrumReport {
    pub fn is_degenerate(&self) -> bool {
        self.zero_multiplicity > 1
    }

    /// `1/gap`, the supremum of `var(f)/𝓓(f, f)`; infinite on reducible
    /// sectors.
    pub fn relaxation_time(&self) -> f64 {
        if self.is_degenerate() || !(self.gap > 0.0) {
            f64::INFINITY
        } else {
            1.0 / self.gap
        }
    }
}

/// Smallest nonzero eigenvalue of `−G` by Lanczos on the symmetrized operator
/// with `sqrt(π)` deflated.
pub fn iterative_gap(op: &ReversibleOperator, opts: &LanczosOptions) -> Result<SpectrumReport> {
    let n = op.dim();
    if n < 2 {
        return Err(Error::DegenerateSector);
    }
    let s = op.symmetrized_sparse()?;
    let mut u: Vec<f64> = op.pi().iter().map(|p| p.sqrt()).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    let r = lowest_eigenpair(
        n,
        |x, y| {
            s.mul_vec_into(x, y);
            y.iter_mut().for_each(|v| *v = -*v);
        },
        &[u],
        opts,
    )?;
    let f = r
        .vector
        .iter()
        .zip(op.log_pi())
        .map(|(x, l)| x * (-0.5 * l).exp())
        .collect();
    Ok(SpectrumReport {
        eigenvalues: vec![r.value],
        gap: r.value,
        method: Method::Iterative,
        residual: r.residual,
        iterations: r.matvecs,
        zero_multiplicity: 0,
        eigenvector: Some(f),
    })
}

/// Whether the sorted multiset `sub` embeds in the sorted multiset `sup`
/// with every matched pair within `tol`. Also returns the largest deviation
/// of the matching found.
pub fn multiset_contains(sup: &[f64], sub: &[f64], tol: f64) -> (bool, f64) {
    let mut j = 0;
    let mut worst: f64 = 0.0;
    for &x in sub {
        while j < sup.len() && sup[j] < x - tol {
            j += 1;
        }
        if j == sup.len() || (sup[j] - x).abs() > tol {
            let dev = sup
                .iter()
                .map(|y| (y - x).abs())
                .fold(f64::INFINITY, f64::min);
            return (false, dev.max(worst));
        }
        worst = worst.max((sup[j] - x).abs());
        j += 1;
    }
    (true, worst)
}

/// Largest `|a_i − b_i|` between two sorted lists of equal length, infinite
/// if the lengths differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
