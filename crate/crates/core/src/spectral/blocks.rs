//! Exact block decomposition of lattice generators built on a
//! [`CellGeometry`] with all slot pairs exchanging.
//!
//! The symmetrized generator commutes with permutations of the slots inside
//! each cell, so it acts on the collective spin of each cell: with `c` slots
//! per cell, the cell spin `j ∈ {c/2, c/2 − 1, …}` is conserved and the
//! operator reduces to a matrix on `m_x ∈ [−j_x, j_x]` with `Σ_x (m_x + c/2) = N`.
//! In the block labelled `(j_x)` the symmetrized `−G` has diagonal entry
//! `p·Σ_{(x,y)} [q ω_x (c − ω_y) + q⁻¹ (c − ω_x) ω_y]` with `ω = m + c/2`, and
//! the entry `−p·c₊(j_x, m_x) c₋(j_y, m_y)` between `m` and the state with
//! `m_x + 1`, `m_y − 1`. Each block appears with multiplicity
//! `Π_x [C(c, c/2 − j_x) − C(c, c/2 − j_x − 1)]`. The block with every
//! `j_x = c/2` is the symmetrized occupation generator.

use super::dense::symmetric_eigen;
use super::lanczos::{lowest_eigenpair, LanczosOptions};
use super::ZERO_THRESHOLD;
use crate::combinatorics::{binomial, BoundedCompositions};
use crate::error::{Error, Result};
use crate::operators::{CellGeometry, CsrMatrix};

/// Blocks above this dimension are solved iteratively.
pub const BLOCK_DENSE_LIMIT: usize = 1500;

/// One collective-spin block of a symmetrized lattice generator.
#[derive(Debug, Clone)]
pub struct ExchangeBlock {
    /// `2 j_x` for each cell.
    pub twice_j: Vec<usize>,
    pub multiplicity: u128,
    /// Symmetrized `−G` on the block.
    pub matrix: CsrMatrix,
    /// Stationary amplitude `sqrt(π)` for the fully symmetric block.
    pub zero_mode: Option<Vec<f64>>,
}

impl ExchangeBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_symmetric_block(&self) -> bool {
        self.zero_mode.is_some()
    }
}

fn spin_multiplicity(c: usize, twice_j: usize) -> u128 {
    let k = ((c - twice_j) / 2) as u64;
    let a = binomial(c as u64, k);
    let b = if k == 0 { 0 } else { binomial(c as u64, k - 1) };
    a - b
}

/// All blocks with a nonempty state space, in lexicographic order of
/// `(2j_x)` from the fully symmetric block down.
pub fn exchange_blocks(
    geom: &CellGeometry,
    q: f64,
    particles: usize,
    prefactor: f64,
) -> Result<Vec<ExchangeBlock>> {
    let c = geom.capacity();
    let cells = geom.cells();
    if particles > geom.sites() {
        return Err(crate::error::invalid("too many particles for the geometry"));
    }
    let choices: Vec<usize> = (0..=c / 2).map(|k| c - 2 * k).collect();
    let mut blocks = Vec::new();
    let mut label = vec![0usize; cells];
    let total = choices.len().pow(cells as u32);
    for code in 0..total {
        let mut rest = code;
        for slot in label.iter_mut() {
            *slot = choices[rest % choices.len()];
            rest /= choices.len();
        }
        // k_x = m_x + j_x ∈ [0, 2j_x], ω_x = k_x + (c − 2j_x)/2
        let offset: usize = label.iter().map(|&tj| (c - tj) / 2).sum();
        if particles < offset {
            continue;
        }
        let comps = BoundedCompositions::new(label.clone(), particles - offset);
        if comps.is_empty() {
            continue;
        }
        let multiplicity = label.iter().map(|&tj| spin_multiplicity(c, tj)).product();
        let symmetric = label.iter().all(|&tj| tj == c);
        blocks.push(build_block(geom, q, prefactor, &label, &comps, multiplicity, symmetric)?);
    }
    Ok(blocks)
}

fn build_block(
    geom: &CellGeometry,
    q: f64,
    prefactor: f64,
    twice_j: &[usize],
    comps: &BoundedCompositions,
    multiplicity: u128,
    symmetric: bool,
) -> Result<ExchangeBlock> {
    let c = geom.capacity();
    let states = comps.to_vec();
    let mut rows = Vec::with_capacity(states.len());
    let mut scratch = vec![0usize; twice_j.len()];
    for (a, k) in states.iter().enumerate() {
        let omega: Vec<usize> = k.iter().zip(twice_j).map(|(&k, &tj)| k + (c - tj) / 2).collect();
        let mut diag = 0.0;
        let mut row = Vec::new();
        for &(x, y) in geom.bonds() {
            let (wx, wy) = (omega[x] as f64, omega[y] as f64);
            diag += q * wx * (c as f64 - wy) + (c as f64 - wx) * wy / q;
            // raise m_x, lower m_y
            let (tx, ty) = (twice_j[x], twice_j[y]);
            if k[x] < tx && k[y] > 0 {
                let amp = (((tx - k[x]) * (k[x] + 1)) as f64).sqrt()
                    * ((k[y] * (ty - k[y] + 1)) as f64).sqrt();
                scratch.copy_from_slice(k);
                scratch[x] += 1;
                scratch[y] -= 1;
                row.push((comps.rank(&scratch)? as usize, -prefactor * amp));
            }
            if k[x] > 0 && k[y] < ty {
                let amp = ((k[x] * (tx - k[x] + 1)) as f64).sqrt()
                    * (((ty - k[y]) * (k[y] + 1)) as f64).sqrt();
                scratch.copy_from_slice(k);
                scratch[x] -= 1;
                scratch[y] += 1;
                row.push((comps.rank(&scratch)? as usize, -prefactor * amp));
            }
        }
        row.push((a, prefactor * diag));
        rows.push(row);
    }
    let zero_mode = symmetric.then(|| {
        let ln_q = q.ln();
        let logs: Vec<f64> = states
            .iter()
            .map(|w| 0.5 * geom.occupation_log_weight(w, ln_q))
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut v: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        v
    });
    Ok(ExchangeBlock {
        twice_j: twice_j.to_vec(),
        multiplicity,
        matrix: CsrMatrix::from_rows(states.len(), rows),
        zero_mode,
    })
}

/// Full spectrum of `−G` with multiplicities, assembled from the blocks.
pub fn block_spectrum(blocks: &[ExchangeBlock]) -> Vec<f64> {
    let mut out = Vec::new();
    for b in blocks {
        let (vals, _) = symmetric_eigen(b.matrix.to_dense());
        for v in vals {
            for _ in 0..b.multiplicity {
                out.push(v);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Gap obtained block by block.
#[derive(Debug, Clone)]
pub struct BlockGap {
    pub gap: f64,
    /// `2j` labels of the block attaining the gap.
    pub twice_j: Vec<usize>,
    pub blocks: usize,
    pub largest_block: usize,
    pub residual: f64,
    pub iterations: usize,
}

/// Lowest eigenvalue of one block; for the symmetric block the stationary
/// direction is removed first.
fn block_lowest(block: &ExchangeBlock, opts: &LanczosOptions) -> Result<(f64, f64, usize)> {
    let n = block.dim();
    let deflate: Vec<Vec<f64>> = block.zero_mode.iter().cloned().collect();
    if n <= deflate.len() {
        return Ok((f64::INFINITY, 0.0, 0));
    }
    if n <= BLOCK_DENSE_LIMIT {
        let dense = block.matrix.to_dense();
        let (vals, vecs) = symmetric_eigen(dense.clone());
        let k = if block.is_symmetric_block() { 1 } else { 0 };
        let v = vecs.column(k).into_owned();
        let res = (&dense * &v - &v * vals[k]).norm();
        return Ok((vals[k], res, 0));
    }
    let r = lowest_eigenpair(n, |x, y| block.matrix.mul_vec_into(x, y), &deflate, opts)?;
    Ok((r.value, r.residual, r.matvecs))
}

/// Spectral gap of the lattice generator `G` on `geom` from its exchange
/// blocks.
pub fn block_gap(
    geom: &CellGeometry,
    q: f64,
    particles: usize,
    prefactor: f64,
    opts: &LanczosOptions,
) -> Result<BlockGap> {
    let blocks = exchange_blocks(geom, q, particles, prefactor)?;
    let total: u128 = blocks.iter().map(|b| b.multiplicity * b.dim() as u128).sum();
    if total < 2 {
        return Err(Error::DegenerateSector);
    }
    let mut best = BlockGap {
        gap: f64::INFINITY,
        twice_j: vec![],
        blocks: blocks.len(),
        largest_block: blocks.iter().map(|b| b.dim()).max().unwrap_or(0),
        residual: 0.0,
        iterations: 0,
    };
    for b in &blocks {
        let (value, res, its) = block_lowest(b, opts)?;
        best.iterations += its;
        if value < best.gap {
            best.gap = value;
            best.twice_j = b.twice_j.clone();
            best.residual = res;
        }
    }
    if !(best.gap >= ZERO_THRESHOLD) {
        return Err(Error::DegenerateSector);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::super::dense::dense_gap;
    use super::*;
    use crate::operators::{full_generator, SlotPairs};
    use crate::state_space::EnsembleParams;

    #[test]
    fn multiplicities_count_the_sector() {
        for &(l, h, n) in &[(2, 2, 2), (3, 2, 2), (3, 3, 4), (4, 2, 3), (4, 3, 6)] {
            let geom = CellGeometry::chain(l, h).unwrap();
            let blocks = exchange_blocks(&geom, 0.5, n, 1.0 / l as f64).unwrap();
            let total: u128 = blocks.iter().map(|b| b.multiplicity * b.dim() as u128).sum();
            assert_eq!(total, binomial((l * h) as u64, n as u64));
        }
    }

    #[test]
    fn block_spectrum_equals_full_spectrum() {
        for &(l, h, n) in &[(2, 2, 2), (3, 2, 2), (2, 3, 3), (3, 3, 4), (4, 2, 3)] {
            let p = EnsembleParams::new(0.5, l, h, n).unwrap();
            let full = dense_gap(&full_generator(&p).unwrap()).unwrap();
            let geom = CellGeometry::chain(l, h).unwrap();
            let blocks = exchange_blocks(&geom, 0.5, n, 1.0 / l as f64).unwrap();
            let spec = block_spectrum(&blocks);
            assert_eq!(spec.len(), full.eigenvalues.len());
            for (a, b) in spec.iter().zip(&full.eigenvalues) {
                assert!((a - b).abs() < 1e-10, "L={l} H={h} N={n}");
            }
            let g = block_gap(&geom, 0.5, n, 1.0 / l as f64, &LanczosOptions::default()).unwrap();
            assert!((g.gap - full.gap).abs() < 1e-10);
        }
    }

    #[test]
    fn lifted_diagonal_blocks() {
        let region = crate::operators::DiagonalRegion::new(1, 3).unwrap();
        let geom = region.geometry(2).unwrap();
        let q = crate::operators::q_of_delta(1.5);
        for n in 1..geom.sites() {
            let op = geom.lattice_generator(q, n, 0.5, SlotPairs::All, "lifted", 1 << 20).unwrap();
            let full = dense_gap(&op).unwrap();
            let spec = block_spectrum(&exchange_blocks(&geom, q, n, 0.5).unwrap());
            for (a, b) in spec.iter().zip(&full.eigenvalues) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn one_state_sector_is_degenerate() {
        let geom = CellGeometry::chain(2, 2).unwrap();
        assert!(matches!(
            block_gap(&geom, 0.5, 0, 0.5, &LanczosOptions::default()),
            Err(Error::DegenerateSector)
        ));
    }
}
