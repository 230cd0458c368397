use super::ReversibleOperator;
use crate::error::{invalid, Result};
use crate::state_space::{
    build_partition_table, enumerate_lattice_configs, stick_occupation_kernel, EnsembleParams,
    LatticeSector, StickKernel,
};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// The single-stick random walk `K(n, m) = ν(m | n)` on the feasible
/// occupations `n₋..=n₊`, in kernel form and reversible with respect to `ν₀`.
pub fn operator_k(params: &EnsembleParams) -> Result<ReversibleOperator> {
    Ok(k_with_kernel(params)?.1)
}

/// [`operator_k`] together with the occupation statistics it was built from.
pub fn k_with_kernel(params: &EnsembleParams) -> Result<(StickKernel, ReversibleOperator)> {
    params.validate()?;
    if params.sticks < 2 {
        return Err(invalid("K needs at least two sticks"));
    }
    let table = build_partition_table(params);
    let kernel = stick_occupation_kernel(params, &table)?;
    let n = kernel.len();
    let m = DMatrix::from_fn(n, n, |a, b| kernel.cond[a][b]);
    let op = ReversibleOperator::from_kernel("K", &kernel.nu0, &m);
    Ok((kernel, op))
}

/// `n̄ = n − ρ` on the occupation range of `kernel`, with `ρ = N/L`.
pub fn centred_occupation(params: &EnsembleParams, kernel: &StickKernel) -> Vec<f64> {
    let rho = params.density();
    kernel.occupations().map(|n| n as f64 - rho).collect()
}

/// Conditional expectations `ν(· | 𝓕_k)` given the full configuration of
/// stick `k`, on a canonical lattice sector.
#[derive(Debug, Clone)]
pub struct StickProjections {
    sector: LatticeSector,
    pi: Vec<f64>,
    /// `group[k][a]`: index of stick `k`'s pattern in state `a`.
    group: Vec<Vec<usize>>,
    /// `mass[k][g]`: `ν` mass of pattern `g` on stick `k`.
    mass: Vec<Vec<f64>>,
}

impl StickProjections {
    /// `pi` must be the canonical law on the sector of `params`, in sector
    /// order, e.g. the stationary law of [`super::full_generator`].
    pub fn new(params: &EnsembleParams, pi: &[f64]) -> Result<Self> {
        let sector = enumerate_lattice_configs(params, None)?;
        if pi.len() != sector.len() {
            return Err(crate::Error::DimensionMismatch {
                expected: sector.len(),
                found: pi.len(),
            });
        }
        let mut group = Vec::with_capacity(params.sticks);
        let mut mass = Vec::with_capacity(params.sticks);
        for k in 0..params.sticks {
            let mut ids: HashMap<u64, usize> = HashMap::new();
            let mut g = Vec::with_capacity(sector.len());
            let mut m = Vec::new();
            for (a, alpha) in sector.iter().enumerate() {
                let next = ids.len();
                let id = *ids.entry(alpha.stick_pattern(k)).or_insert(next);
                if id == m.len() {
                    m.push(0.0);
                }
                m[id] += pi[a];
                g.push(id);
            }
            group.push(g);
            mass.push(m);
        }
        Ok(StickProjections {
            sector,
            pi: pi.to_vec(),
            group,
            mass,
        })
    }

    pub fn sector(&self) -> &LatticeSector {
        &self.sector
    }

    pub fn sticks(&self) -> usize {
        self.group.len()
    }

    /// `ν(f | 𝓕_k)` as a function on the sector.
    pub fn conditional_expectation(&self, f: &[f64], k: usize) -> Vec<f64> {
        let mut acc = vec![0.0; self.mass[k].len()];
        for (a, &g) in self.group[k].iter().enumerate() {
            acc[g] += self.pi[a] * f[a];
        }
        for (v, m) in acc.iter_mut().zip(&self.mass[k]) {
            *v /= m;
        }
        self.group[k].iter().map(|&g| acc[g]).collect()
    }

    /// `var(f | 𝓕_k)` as a function on the sector.
    pub fn conditional_variance(&self, f: &[f64], k: usize) -> Vec<f64> {
        let mean = self.conditional_expectation(f, k);
        let sq: Vec<f64> = f.iter().zip(&mean).map(|(x, m)| (x - m).powi(2)).collect();
        self.conditional_expectation(&sq, k)
    }

    /// `P f = (1/L) Σ_k ν(f | 𝓕_k)`.
    pub fn apply_p(&self, f: &[f64]) -> Vec<f64> {
        let l = self.sticks() as f64;
        let mut out = vec![0.0; f.len()];
        for k in 0..self.sticks() {
            for (o, v) in out.iter_mut().zip(self.conditional_expectation(f, k)) {
                *o += v / l;
            }
        }
        out
    }

    /// Dense kernel `P(α, β) = (1/L) Σ_k 1{η_k(α) = η_k(β)} ν(β) / ν(η_k(α))`.
    pub fn kernel(&self) -> DMatrix<f64> {
        let n = self.pi.len();
        let l = self.sticks() as f64;
        let mut p = DMatrix::zeros(n, n);
        for k in 0..self.sticks() {
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.mass[k].len()];
            for (a, &g) in self.group[k].iter().enumerate() {
                members[g].push(a);
            }
            for (g, states) in members.iter().enumerate() {
                let m = self.mass[k][g];
                for &a in states {
                    for &b in states {
                        p[(a, b)] += self.pi[b] / (m * l);
                    }
                }
            }
        }
        p
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.pi).map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self, f: &[f64]) -> f64 {
        let m = self.mean(f);
        f.iter().zip(&self.pi).map(|(x, p)| p * (x - m).powi(2)).sum()
    }
}

/// The averaged projection `P` in kernel form on the canonical sector.
pub fn operator_p(params: &EnsembleParams) -> Result<ReversibleOperator> {
    let pi = super::full_generator(params)?.pi().to_vec();
    let proj = StickProjections::new(params, &pi)?;
    Ok(ReversibleOperator::from_kernel("P", &pi, &proj.kernel()))
}

/// `f(α) = Σ_ℓ a_ℓ (n_ℓ(α) − ρ)`, a member of the class spanned by centred
/// stick occupations.
pub fn class_a_function(sector: &LatticeSector, coefficients: &[f64]) -> Result<Vec<f64>> {
    let params = sector.params();
    if coefficients.len() != params.sticks {
        return Err(crate::Error::DimensionMismatch {
            expected: params.sticks,
            found: coefficients.len(),
        });
    }
    let rho = params.density();
    Ok(sector
        .iter()
        .map(|alpha| {
            coefficients
                .iter()
                .enumerate()
                .map(|(l, a)| a * (alpha.stick_count(l) as f64 - rho))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(q: f64, l: usize, h: usize, n: usize) -> EnsembleParams {
        EnsembleParams::new(q, l, h, n).unwrap()
    }

    #[test]
    fn k_three_single_site_sticks() {
        let k = operator_k(&p(0.5, 3, 1, 1)).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 1.0, 0.0]);
        assert!((k.kernel_matrix() - want).abs().max() < 1e-14);
        assert!(operator_k(&p(0.5, 1, 3, 1)).is_err());
    }

    #[test]
    fn k_centred_occupation_eigenfunction() {
        for q in [0.3, 0.5, 0.8] {
            for &(l, h) in &[(2, 2), (3, 3), (5, 4), (8, 3)] {
                for n in 1..l * h {
                    let params = p(q, l, h, n);
                    let (kern, op) = k_with_kernel(&params).unwrap();
                    let nbar = centred_occupation(&params, &kern);
                    let km = op.kernel_matrix();
                    let kn = &km * nalgebra::DVector::from_vec(nbar.clone());
                    for (a, v) in kn.iter().enumerate() {
                        assert!((v + nbar[a] / (l as f64 - 1.0)).abs() < 1e-10);
                    }
                    let ones = &km * nalgebra::DVector::from_element(nbar.len(), 1.0);
                    assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
                    assert!(op.check().passes(1e-12));
                }
            }
        }
    }

    #[test]
    fn p_is_stochastic_and_reversible() {
        let params = p(0.5, 3, 2, 2);
        let op = operator_p(&params).unwrap();
        assert!(op.check().passes(1e-12));
        let k = op.kernel_matrix();
        for r in k.row_iter() {
            assert!((r.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p_matches_conditional_expectations() {
        let params = p(0.5, 3, 2, 3);
        let op = operator_p(&params).unwrap();
        let proj = StickProjections::new(&params, op.pi()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f: Vec<f64> = (0..op.dim()).map(|_| rng.random::<f64>()).collect();
        let direct = proj.apply_p(&f);
        let via = op.kernel_matrix() * nalgebra::DVector::from_vec(f);
        for (a, b) in direct.iter().zip(via.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn variance_decomposition_and_p_identity() {
        let params = p(0.5, 3, 2, 2);
        let pi = super::super::full_generator(&params).unwrap().pi().to_vec();
        let proj = StickProjections::new(&params, &pi).unwrap();
        let l = params.sticks as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mut f: Vec<f64> = (0..pi.len()).map(|_| rng.random::<f64>() - 0.5).collect();
            let m = proj.mean(&f);
            f.iter_mut().for_each(|x| *x -= m);
            let mut within = 0.0;
            let mut between = 0.0;
            for k in 0..params.sticks {
                within += proj.mean(&proj.conditional_variance(&f, k)) / l;
                between += proj.variance(&proj.conditional_expectation(&f, k)) / l;
            }
            assert!((proj.variance(&f) - within - between).abs() < 1e-12);
            let pf = proj.apply_p(&f);
            let fpf: f64 = f.iter().zip(&pf).zip(&pi).map(|((a, b), w)| a * b * w).sum();
            assert!((between - fpf).abs() < 1e-12);
        }
    }

    #[test]
    fn class_a_eigenrelation() {
        for &(l, h, n) in &[(3, 2, 2), (3, 3, 4), (4, 2, 3), (4, 3, 5)] {
            let params = p(0.5, l, h, n);
            let op = operator_p(&params).unwrap();
            let proj = StickProjections::new(&params, op.pi()).unwrap();
            let coeffs: Vec<f64> = (0..l).map(|i| 1.0 + i as f64 * 0.7).collect();
            let f = class_a_function(proj.sector(), &coeffs).unwrap();
            let pf = proj.apply_p(&f);
            let ratio = (l as f64 - 2.0) / (l as f64 - 1.0);
            for (x, y) in f.iter().zip(&pf) {
                assert!(((x - y) - ratio * x).abs() < 1e-10);
            }
        }
    }
}
