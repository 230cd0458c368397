use super::{Method, SpectrumReport, DENSE_CAP, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::operators::{CsrMatrix, ReversibleOperator};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// `S = D^{1/2} G D^{-1/2}` with `D = diag(π)`, symmetric for reversible `G`.
pub fn symmetrize(op: &ReversibleOperator) -> Result<DMatrix<f64>> {
    Ok(op.symmetrized_sparse()?.to_dense())
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// (as columns) of a symmetric matrix.
pub fn symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    (values, vectors)
}

/// Ascending eigenvalues of a symmetric matrix, e.g. a Hamiltonian.
pub fn symmetric_spectrum(m: &CsrMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.to_dense().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn residual(m: &DMatrix<f64>, value: f64, vector: &DVector<f64>) -> f64 {
    let r = m * vector - vector * value;
    r.norm() / vector.norm()
}

/// Full spectrum of `−G` by a dense symmetric eigensolve.
pub fn dense_gap(op: &ReversibleOperator) -> Result<SpectrumReport> {
    dense_gap_capped(op, DENSE_CAP)
}

pub fn dense_gap_capped(op: &ReversibleOperator, cap: usize) -> Result<SpectrumReport> {
    let n = op.dim();
    if n > cap {
        return Err(Error::CapExceeded {
            size: n as u128,
            cap: cap as u64,
        });
    }
    if n < 2 {
        return Err(Error::DegenerateSector);
    }
    let neg = -symmetrize(op)?;
    let (values, vectors) = symmetric_eigen(neg.clone());
    let zero_multiplicity = values.iter().filter(|v| v.abs() < ZERO_THRESHOLD).count();
    let k = values.iter().position(|&v| v >= ZERO_THRESHOLD);
    let (gap, res, eigenvector) = match k {
        Some(k) => {
            let v = vectors.column(k).into_owned();
            let res = residual(&neg, values[k], &v);
            // back to functions on the state space: f = D^{-1/2} v
            let f = v
                .iter()
                .zip(op.log_pi())
                .map(|(x, l)| x * (-0.5 * l).exp())
                .collect();
            (values[k], res, Some(f))
        }
        None => (f64::NAN, 0.0, None),
    };
    Ok(SpectrumReport {
        eigenvalues: values,
        gap,
        method: Method::Dense,
        residual: res,
        iterations: 0,
        zero_multiplicity,
        eigenvector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{bernoulli_laplace, full_generator, profile_generator};
    use crate::state_space::EnsembleParams;

    #[test]
    fn two_state_gap() {
        for q in [0.2, 0.5, 0.9] {
            let p = EnsembleParams::new(q, 1, 2, 1).unwrap();
            let s = symmetrize(&full_generator(&p).unwrap()).unwrap();
            assert!((s[(0, 1)] - s[(1, 0)]).abs() < 1e-15);
            let r = dense_gap(&full_generator(&p).unwrap()).unwrap();
            assert!((r.gap - (q + 1.0 / q)).abs() < 1e-12);
            assert_eq!(r.zero_multiplicity, 1);
            assert!(!r.is_degenerate());
        }
    }

    #[test]
    fn uniform_measure_is_unchanged_by_symmetrization() {
        let op = bernoulli_laplace(4, 2).unwrap();
        let s = symmetrize(&op).unwrap();
        assert!((s - op.to_dense_generator()).abs().max() < 1e-15);
    }

    #[test]
    fn disconnected_operator_is_flagged() {
        let op = ReversibleOperator::from_rows(
            "two-components",
            vec![0.0; 4],
            vec![vec![(1, 1.0)], vec![(0, 1.0)], vec![(3, 2.0)], vec![(2, 2.0)]],
        );
        let r = dense_gap(&op).unwrap();
        assert_eq!(r.zero_multiplicity, 2);
        assert!(r.is_degenerate());
        assert_eq!(r.relaxation_time(), f64::INFINITY);
    }

    #[test]
    fn one_state_sector_refused() {
        let p = EnsembleParams::new(0.5, 2, 2, 0).unwrap();
        assert!(matches!(dense_gap(&full_generator(&p).unwrap()), Err(Error::DegenerateSector)));
    }

    #[test]
    fn rayleigh_quotient_of_gap_vector() {
        let p = EnsembleParams::new(0.5, 3, 2, 3).unwrap();
        let op = full_generator(&p).unwrap();
        let r = dense_gap(&op).unwrap();
        let f = r.eigenvector.as_ref().unwrap();
        assert!(op.mean(f).unwrap().abs() < 1e-10);
        let ratio = op.variance(f).unwrap() / op.dirichlet_form(f).unwrap();
        assert!((ratio - 1.0 / r.gap).abs() < 1e-9);
    }

    #[test]
    fn profile_spectrum_inside_full_spectrum() {
        let p = EnsembleParams::new(0.5, 2, 2, 2).unwrap();
        let full = dense_gap(&full_generator(&p).unwrap()).unwrap();
        let prof = dense_gap(&profile_generator(&p).unwrap()).unwrap();
        let (ok, dev) = super::super::multiset_contains(&full.eigenvalues, &prof.eigenvalues, 1e-10);
        assert!(ok, "{dev}");
    }
}
