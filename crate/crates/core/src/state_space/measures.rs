use super::{EnsembleParams, LatticeConfig, PartitionTable, ProfileConfig};
use crate::combinatorics::ln_binomial;
use crate::error::{invalid, Result};

fn check_table(params: &EnsembleParams, table: &PartitionTable) -> Result<()> {
    if table.height() != params.height || (table.ln_q() - params.q.ln()).abs() > 1e-15 {
        return Err(invalid("partition table was built for different parameters"));
    }
    if table.log_z(params.sticks, params.particles) == f64::NEG_INFINITY {
        return Err(invalid("partition table does not cover the requested sector"));
    }
    Ok(())
}

/// `ln ν(α)`.
pub fn log_nu_weight(
    alpha: &LatticeConfig,
    params: &EnsembleParams,
    table: &PartitionTable,
) -> Result<f64> {
    check_table(params, table)?;
    if alpha.sticks() != params.sticks || alpha.height() != params.height {
        return Err(invalid("configuration shape does not match the ensemble"));
    }
    if alpha.particles() != params.particles {
        return Err(invalid(format!(
            "configuration has {} particles, sector has {}",
            alpha.particles(),
            params.particles
        )));
    }
    let log_w: f64 = (0..params.sticks)
        .map(|i| table.log_stick_weight(alpha.stick_pattern(i)))
        .sum();
    Ok(log_w - table.log_z(params.sticks, params.particles))
}

/// Canonical probability `ν(α) = Π q^{2h α_{(i,h)}} / Z_L(N)`.
pub fn nu_weight(alpha: &LatticeConfig, params: &EnsembleParams, table: &PartitionTable) -> Result<f64> {
    log_nu_weight(alpha, params, table).map(f64::exp)
}

/// `ln ν̂(ω)`.
pub fn log_hat_nu_weight(
    omega: &ProfileConfig,
    params: &EnsembleParams,
    table: &PartitionTable,
) -> Result<f64> {
    check_table(params, table)?;
    let w = omega.heights();
    if w.len() != params.height || w.iter().any(|&x| x > params.sticks) {
        return Err(invalid(format!("{w:?} is not a profile of an L = {} box", params.sticks)));
    }
    if omega.total() != params.particles {
        return Err(invalid(format!(
            "profile holds {} particles, sector has {}",
            omega.total(),
            params.particles
        )));
    }
    let ln_q = table.ln_q();
    let log_w: f64 = w
        .iter()
        .enumerate()
        .map(|(r, &x)| ln_binomial(params.sticks as u64, x as u64) + 2.0 * (r + 1) as f64 * x as f64 * ln_q)
        .sum();
    Ok(log_w - table.log_z(params.sticks, params.particles))
}

/// Profile marginal `ν̂(ω) = Π_h C(L, ω_h) q^{2h ω_h} / Z`.
pub fn hat_nu_weight(omega: &ProfileConfig, params: &EnsembleParams, table: &PartitionTable) -> Result<f64> {
    log_hat_nu_weight(omega, params, table).map(f64::exp)
}

/// Row sums of a lattice configuration.
pub fn profile_of(alpha: &LatticeConfig) -> ProfileConfig {
    let l = alpha.sticks();
    let mask = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
    ProfileConfig(
        (0..alpha.height())
            .map(|r| ((alpha.bits() >> (r * l)) & mask).count_ones() as usize)
            .collect(),
    )
}

/// Occupation statistics of single sticks under `ν`.
///
/// Indices are offsets from `n_min`: `nu0[k]` is the probability that a given
/// stick holds `n_min + k` particles and `cond[j][k] = ν(n_min + k | n_min + j)`
/// is the law of a second stick given the first.
#[derive(Debug, Clone)]
pub struct StickKernel {
    pub n_min: usize,
    pub n_max: usize,
    pub nu0: Vec<f64>,
    pub cond: Vec<Vec<f64>>,
}

impl StickKernel {
    pub fn len(&self) -> usize {
        self.nu0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu0.is_empty()
    }

    pub fn occupations(&self) -> impl Iterator<Item = usize> {
        self.n_min..=self.n_max
    }
}

fn occupation_range(params: &EnsembleParams) -> (usize, usize) {
    let others = (params.sticks - 1) * params.height;
    (params.particles.saturating_sub(others), params.height.min(params.particles))
}

/// `ν₀(n) = g(n) Z_{L-1}(N - n) / Z_L(N)` over the feasible range.
pub fn stick_marginal(params: &EnsembleParams, table: &PartitionTable) -> Result<(usize, Vec<f64>)> {
    check_table(params, table)?;
    let (lo, hi) = occupation_range(params);
    let (l, n) = (params.sticks, params.particles);
    let log_zl = table.log_z(l, n);
    let nu0 = (lo..=hi)
        .map(|k| (table.log_g(k) + table.log_z(l - 1, n - k) - log_zl).exp())
        .collect();
    Ok((lo, nu0))
}

/// Marginal and two-stick conditional kernel; needs `L ≥ 2`.
pub fn stick_occupation_kernel(params: &EnsembleParams, table: &PartitionTable) -> Result<StickKernel> {
    if params.sticks < 2 {
        return Err(invalid("the conditional stick kernel needs L ≥ 2"));
    }
    let (lo, nu0) = stick_marginal(params, table)?;
    let hi = lo + nu0.len() - 1;
    let (l, n) = (params.sticks, params.particles);
    let cond = (lo..=hi)
        .map(|m| {
            let denom = table.log_z(l - 1, n - m);
            (lo..=hi)
                .map(|k| {
                    if k + m > n {
                        0.0
                    } else {
                        (table.log_g(k) + table.log_z(l - 2, n - m - k) - denom).exp()
                    }
                })
                .collect()
        })
        .collect();
    Ok(StickKernel {
        n_min: lo,
        n_max: hi,
        nu0,
        cond,
    })
}
