use crate::error::{invalid, Error, Result};

/// Grand-canonical single-stick statistics at a given density.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GrandCanonicalStats {
    pub lambda: f64,
    pub mean: f64,
    pub sigma2: f64,
}

/// Occupation probability of height `h` under the tilt `λ`.
fn site_probability(h: usize, lambda: f64, ln_q: f64) -> f64 {
    // q^{2(h-λ)} / (1 + q^{2(h-λ)}) as a logistic of x = 2(h-λ) ln q
    let x = 2.0 * (h as f64 - lambda) * ln_q;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn stats_at(lambda: f64, height: usize, ln_q: f64) -> GrandCanonicalStats {
    let (mut mean, mut sigma2) = (0.0, 0.0);
    for h in 1..=height {
        let p = site_probability(h, lambda, ln_q);
        mean += p;
        sigma2 += p * (1.0 - p);
    }
    GrandCanonicalStats { lambda, mean, sigma2 }
}

/// Solve `Σ_h p_h(λ) = ρ` for the tilt `λ` by bisection.
pub fn chemical_potential(rho: f64, height: usize, q: f64) -> Result<GrandCanonicalStats> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("q = {q} must lie in (0, 1)")));
    }
    if height == 0 {
        return Err(invalid("H must be at least 1"));
    }
    if !(rho > 0.0 && rho < height as f64) {
        return Err(Error::OutOfRange(format!("density {rho} outside (0, {height})")));
    }
    let ln_q = q.ln();
    let mean = |l: f64| stats_at(l, height, ln_q).mean;

    let centre = (height as f64 + 1.0) / 2.0;
    let mut width = height as f64;
    let (mut lo, mut hi) = (centre - width, centre + width);
    while mean(lo) > rho || mean(hi) < rho {
        width *= 2.0;
        if !width.is_finite() || width > 1e12 {
            return Err(Error::OutOfRange(format!(
                "density {rho} too close to the boundary of (0, {height})"
            )));
        }
        lo = centre - width;
        hi = centre + width;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if mean(mid) < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let stats = stats_at(lambda, height, ln_q);
    if (stats.mean - rho).abs() > 1e-12 {
        return Err(Error::NoConvergence {
            iterations: 200,
            estimate: lambda,
            residual: (stats.mean - rho).abs(),
        });
    }
    Ok(stats)
}
