//! Thick-restart Lanczos for the lowest eigenpair of a symmetric operator on
//! the orthogonal complement of a few known vectors.
//!
//! The basis is kept fully reorthogonalized and the projected matrix is
//! formed explicitly from the stored products `A V`, which costs one extra
//! inner product per basis vector and keeps the Ritz values honest when
//! eigenvalues cluster.

use super::dense::symmetric_eigen;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed of the start vector, fixed for reproducible iteration counts.
pub const LANCZOS_SEED: u64 = 0x1a2c_2057;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Relative residual `‖Ax − θx‖ / max(|θ|, ε)` at convergence.
    pub tol: f64,
    /// Maximum number of operator applications.
    pub max_matvecs: usize,
    /// Largest basis before a restart.
    pub basis_size: usize,
    /// Ritz vectors kept across a restart.
    pub keep: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-8,
            max_matvecs: 20_000,
            basis_size: 60,
            keep: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Project `v` off `fixed` and `basis` twice (classical Gram–Schmidt with
/// reorthogonalization) and return its remaining norm.
fn orthogonalize(v: &mut [f64], fixed: &[Vec<f64>], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for u in fixed.iter().chain(basis) {
            let c = dot(u, v);
            axpy(-c, u, v);
        }
    }
    norm(v)
}

/// Lowest eigenpair of the symmetric operator `apply` restricted to the
/// orthogonal complement of the orthonormal vectors `deflate`.
pub fn lowest_eigenpair(
    dim: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    deflate: &[Vec<f64>],
    opts: &LanczosOptions,
) -> Result<LanczosResult> {
    let free = dim.saturating_sub(deflate.len());
    if free == 0 {
        return Err(Error::DegenerateSector);
    }
    let m = opts.basis_size.min(free).max(1);
    let keep = opts.keep.min(m.saturating_sub(1)).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            let n = orthogonalize(&mut v, deflate, basis);
            if n > 1e-8 {
                v.iter_mut().for_each(|x| *x /= n);
                return Some(v);
            }
        }
        None
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut next = random_unit(&basis).ok_or(Error::DegenerateSector)?;
    let mut matvecs = 0;

    loop {
        // expand up to m vectors
        while basis.len() < m {
            let mut w = vec![0.0; dim];
            apply(&next, &mut w);
            matvecs += 1;
            basis.push(next);
            images.push(w.clone());
            if basis.len() == m {
                break;
            }
            let n = orthogonalize(&mut w, deflate, &basis);
            let scale = norm(images.last().unwrap()).max(1e-300);
            next = if n > 1e-10 * scale {
                w.iter_mut().for_each(|x| *x /= n);
                w
            } else {
                // invariant subspace reached; continue with a fresh direction
                match random_unit(&basis) {
                    Some(v) => v,
                    None => break,
                }
            };
        }

        let k = basis.len();
        let t = DMatrix::from_fn(k, k, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let (theta, y) = symmetric_eigen(t);

        let ritz = |col: usize, src: &[Vec<f64>]| -> Vec<f64> {
            let mut out = vec![0.0; dim];
            for (i, v) in src.iter().enumerate() {
                axpy(y[(i, col)], v, &mut out);
            }
            out
        };
        let x = ritz(0, &basis);
        let ax = ritz(0, &images);
        let mut r = ax.clone();
        axpy(-theta[0], &x, &mut r);
        let res = norm(&r) / norm(&x);
        let rel = res / theta[0].abs().max(1e-12);
        if rel <= opts.tol || k == free {
            return Ok(LanczosResult {
                value: theta[0],
                vector: x,
                residual: res,
                matvecs,
            });
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NoConvergence {
                iterations: matvecs,
                estimate: theta[0],
                residual: res,
            });
        }

        // thick restart: keep the lowest Ritz vectors and the residual direction
        let kept = keep.min(k);
        let new_basis: Vec<Vec<f64>> = (0..kept).map(|c| ritz(c, &basis)).collect();
        let new_images: Vec<Vec<f64>> = (0..kept).map(|c| ritz(c, &images)).collect();
        let mut w = r;
        let n = orthogonalize(&mut w, deflate, &new_basis);
        next = if n > 1e-14 {
            w.iter_mut().for_each(|x| *x /= n);
            w
        } else {
            random_unit(&new_basis).ok_or(Error::DegenerateSector)?
        };
        basis = new_basis;
        images = new_images;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 0.0;
                if i > 0 {
                    v += x[i] - x[i - 1];
                }
                if i + 1 < n {
                    v += x[i] - x[i + 1];
                }
                y[i] = v;
            }
        }
    }

    #[test]
    fn path_graph_fiedler_value() {
        let n = 120;
        let u = vec![1.0 / (n as f64).sqrt(); n];
        let r = lowest_eigenpair(n, path_laplacian(n), std::slice::from_ref(&u), &LanczosOptions::default()).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert!(((r.value - exact) / exact).abs() < 1e-7, "{} vs {exact}", r.value);
        assert!(dot(&r.vector, &u).abs() < 1e-8);
    }

    #[test]
    fn tiny_problem_is_solved_exactly() {
        let n = 3;
        let u = vec![1.0 / 3f64.sqrt(); 3];
        let r = lowest_eigenpair(n, path_laplacian(n), &[u], &LanczosOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fully_deflated_space_is_degenerate() {
        let r = lowest_eigenpair(1, |x, y| y.copy_from_slice(x), &[vec![1.0]], &LanczosOptions::default());
        assert!(matches!(r, Err(Error::DegenerateSector)));
    }

    #[test]
    fn exhausted_budget_reports_estimate() {
        let n = 2000;
        let u = vec![1.0 / (n as f64).sqrt(); n];
        let opts = LanczosOptions {
            max_matvecs: 30,
            basis_size: 10,
            keep: 3,
            tol: 1e-12,
        };
        match lowest_eigenpair(n, path_laplacian(n), &[u], &opts) {
            Err(Error::NoConvergence { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
