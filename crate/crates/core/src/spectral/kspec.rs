use super::dense::symmetric_eigen;
use crate::error::{Error, Result};
use crate::operators::{centred_occupation, k_with_kernel};
use crate::state_space::EnsembleParams;
use nalgebra::{DMatrix, DVector};

/// Spectral data of the single-stick kernel `K` on one sector.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KSpectrumReport {
    pub params: EnsembleParams,
    /// Eigenvalues of `K`, descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalue on constants, `1`.
    pub eig_top: f64,
    /// `⟨n̄, K n̄⟩ / ⟨n̄, n̄⟩`, expected `−1/(L−1)`.
    pub eig_nbar: f64,
    /// `‖K n̄ + n̄/(L−1)‖` in `L²(ν₀)`.
    pub nbar_residual: f64,
    /// `‖K1 − 1‖_∞`.
    pub constant_residual: f64,
    /// Largest `|eigenvalue|` of `K` on the `ν₀`-orthogonal complement of
    /// `{1, n̄}`; `0` when that complement is trivial.
    pub third_modulus: f64,
    /// `gap(𝕀 − K)`: `1 −` the largest eigenvalue on mean-zero functions.
    pub gap: f64,
}

pub fn k_spectrum_report(params: &EnsembleParams) -> Result<KSpectrumReport> {
    let (kernel, op) = k_with_kernel(params)?;
    let n = kernel.len();
    if n < 2 {
        return Err(Error::DegenerateSector);
    }
    let l = params.sticks as f64;
    let k = op.kernel_matrix();
    let nu0 = &kernel.nu0;
    let nbar = DVector::from_vec(centred_occupation(params, &kernel));
    let kn = &k * &nbar;
    let weighted_norm = |v: &DVector<f64>| v.iter().zip(nu0).map(|(x, p)| p * x * x).sum::<f64>().sqrt();
    let target = -&nbar / (l - 1.0);
    let nbar_residual = weighted_norm(&(&kn - &target));
    let nn: f64 = nbar.iter().zip(nu0).map(|(x, p)| p * x * x).sum();
    let eig_nbar = nbar.iter().zip(kn.iter()).zip(nu0).map(|((a, b), p)| p * a * b).sum::<f64>() / nn;
    let ones = &k * DVector::from_element(n, 1.0);
    let constant_residual = ones.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);

    // symmetric form S = D^{1/2} K D^{-1/2}
    let sq: Vec<f64> = nu0.iter().map(|p| p.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |a, b| sq[a] * k[(a, b)] / sq[b]);
    let s = 0.5 * (&s + s.transpose());
    let (mut values, _) = symmetric_eigen(s.clone());
    values.reverse();

    // orthonormal basis of the complement of sqrt(ν₀) and sqrt(ν₀)·n̄
    let mut fixed: Vec<DVector<f64>> = Vec::new();
    for v in [DVector::from_vec(sq.clone()), DVector::from_fn(n, |a, _| sq[a] * nbar[a])] {
        let mut v = v;
        for u in &fixed {
            v -= u * u.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-12 {
            fixed.push(v / norm);
        }
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for e in 0..n {
        let mut v = DVector::from_fn(n, |a, _| if a == e { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for u in fixed.iter().chain(&basis) {
                v -= u * u.dot(&v);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    let third_modulus = if basis.is_empty() {
        0.0
    } else {
        let c = DMatrix::from_columns(&basis);
        let m = c.transpose() * &s * &c;
        let m = 0.5 * (&m + m.transpose());
        m.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max)
    };

    // largest eigenvalue on the complement of constants
    let mut c1 = Vec::new();
    let u0 = &fixed[0];
    for e in 0..n {
        let mut v = DVector::from_fn(n, |a, _| if a == e { 1.0 } else { 0.0 });
        for _ in 0..2 {
            v -= u0 * u0.dot(&v);
            for u in &c1 {
                let u: &DVector<f64> = u;
                v -= u * u.dot(&v);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            c1.push(v / norm);
        }
    }
    let c = DMatrix::from_columns(&c1);
    let m = c.transpose() * &s * &c;
    let m = 0.5 * (&m + m.transpose());
    let top_rest = m.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(KSpectrumReport {
        params: *params,
        eig_top: values[0],
        eigenvalues: values,
        eig_nbar,
        nbar_residual,
        constant_residual,
        third_modulus,
        gap: 1.0 - top_rest,
    })
}

/// `w(L, H) = sup_N 1/gap(𝕀 − K)` over `1 ≤ N ≤ LH − 1`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WConstant {
    pub q: f64,
    pub sticks: usize,
    pub height: usize,
    pub w: f64,
    pub argmax: usize,
}

pub fn w_constant(q: f64, sticks: usize, height: usize) -> Result<WConstant> {
    let mut best = WConstant {
        q,
        sticks,
        height,
        w: f64::NEG_INFINITY,
        argmax: 0,
    };
    for n in 1..sticks * height {
        let p = EnsembleParams::new(q, sticks, height, n)?;
        match k_spectrum_report(&p) {
            Ok(r) => {
                let v = 1.0 / r.gap;
                if v > best.w {
                    best.w = v;
                    best.argmax = n;
                }
            }
            Err(Error::DegenerateSector) => continue,
            Err(e) => return Err(e),
        }
    }
    if best.w == f64::NEG_INFINITY {
        return Err(Error::DegenerateSector);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_single_site_sticks() {
        let r = k_spectrum_report(&EnsembleParams::new(0.5, 3, 1, 1).unwrap()).unwrap();
        assert!((r.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] + 0.5).abs() < 1e-14);
        assert_eq!(r.third_modulus, 0.0);
        assert!((r.gap - 1.5).abs() < 1e-14);
    }

    #[test]
    fn nbar_eigenvalue_on_a_grid() {
        for q in [0.3, 0.5, 0.8] {
            for &(l, h) in &[(2, 3), (3, 2), (4, 4), (7, 3)] {
                for n in 1..l * h {
                    let r = k_spectrum_report(&EnsembleParams::new(q, l, h, n).unwrap()).unwrap();
                    assert!((r.eig_nbar + 1.0 / (l as f64 - 1.0)).abs() < 1e-10);
                    assert!(r.nbar_residual < 1e-10);
                    assert!((r.eig_top - 1.0).abs() < 1e-10);
                    if l >= 3 {
                        assert!(r.gap > 0.0, "{q} {l} {h} {n} {:?}", r.eigenvalues);
                    }
                }
            }
        }
    }

    #[test]
    fn third_modulus_decays_at_height_two() {
        // frozen from an independent evaluation of the 3×3 kernels
        let expected = [0.1212, 0.0460, 0.0329, 0.01886, 0.01467, 0.01000, 0.00823, 0.00615];
        for (k, l) in (3..=10).enumerate() {
            let p = EnsembleParams::new(0.5, l, 2, l.div_ceil(2)).unwrap();
            let r = k_spectrum_report(&p).unwrap();
            assert!(((r.third_modulus - expected[k]) / expected[k]).abs() < 5e-3, "L={l}: {}", r.third_modulus);
        }
    }

    #[test]
    fn two_sticks_kernel_is_the_reflection() {
        // the other stick holds N − n, so K is an involution with spectrum ±1
        let r = k_spectrum_report(&EnsembleParams::new(0.5, 2, 3, 2).unwrap()).unwrap();
        for v in &r.eigenvalues {
            assert!((v.abs() - 1.0).abs() < 1e-12);
        }
        assert!(r.gap.abs() < 1e-12);
    }

    #[test]
    fn third_modulus_times_l_decreases() {
        let mut prev = f64::INFINITY;
        for l in 3..=10 {
            let p = EnsembleParams::new(0.5, l, 2, (2 * l).div_ceil(4)).unwrap();
            let v = k_spectrum_report(&p).unwrap().third_modulus * l as f64;
            assert!(v < prev, "L={l}");
            prev = v;
        }
    }

    #[test]
    fn w_is_finite() {
        let w = w_constant(0.5, 3, 2).unwrap();
        assert!(w.w.is_finite() && w.w >= 1.0 / 2.0);
    }
}
