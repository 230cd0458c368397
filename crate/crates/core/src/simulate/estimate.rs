//! Decay rate of the normalized autocorrelation `C(t)` of a sampled
//! observable: least squares on `log C` over the lags where
//! `C ∈ [lo, hi]` up to the first crossing of `lo`, with a block bootstrap
//! for the standard error.

use super::{SimulationPlan, TimeSeries};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mixed into the plan seed for the bootstrap stream.
pub const BOOTSTRAP_SALT: u64 = 0xb007_5742;

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EstimatorOptions {
    /// Fit window on `C(t)`.
    pub window: (f64, f64),
    pub min_samples: usize,
    pub replicates: usize,
    /// Upper bound on the number of bootstrap blocks.
    pub max_blocks: usize,
    /// Each block spans at least this many fit horizons.
    pub block_horizons: usize,
    /// Smallest acceptable coefficient of determination of the fit.
    pub min_r2: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            window: (0.05, 0.5),
            min_samples: 1000,
            replicates: 200,
            max_blocks: 100,
            block_horizons: 10,
            min_r2: 0.9,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RelaxationEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub n_samples: usize,
    /// Lags (in samples) used by the fit.
    pub fit_lags: (usize, usize),
    pub r2: f64,
    pub blocks: usize,
    /// Bootstrap replicates that produced a fit.
    pub replicates: usize,
}

/// Normalized autocorrelation `C(k)` for `k = 0..=max_lag`.
pub fn autocorrelation(values: &[f64], max_lag: usize) -> Vec<f64> {
    BlockStats::correlation(&[&BlockStats::new(values, max_lag)])
}

/// `C(k)` up to and including the first lag where it falls below `floor`,
/// or up to `cap`.
fn autocorrelation_until(x: &[f64], floor: f64, cap: usize) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut out = Vec::new();
    for k in 0..=cap.min(x.len() - 1) {
        let c = x[..x.len() - k]
            .iter()
            .zip(&x[k..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / (x.len() - k) as f64
            / var;
        out.push(c);
        if !(c >= floor) {
            break;
        }
    }
    out
}

/// Per-block sums from which the pooled autocorrelation of any multiset of
/// blocks follows.
#[derive(Debug, Clone)]
struct BlockStats {
    n: f64,
    sum: f64,
    sum_sq: f64,
    /// `Σ_{i < n−k} x_i x_{i+k}`, `Σ_{i < n−k} x_i`, `Σ_{i ≥ k} x_i`.
    lag: Vec<f64>,
    head: Vec<f64>,
    tail: Vec<f64>,
}

impl BlockStats {
    fn new(x: &[f64], max_lag: usize) -> Self {
        let n = x.len();
        let max_lag = max_lag.min(n.saturating_sub(1));
        let mut lag = vec![0.0; max_lag + 1];
        let mut head = vec![0.0; max_lag + 1];
        let mut tail = vec![0.0; max_lag + 1];
        let total: f64 = x.iter().sum();
        let mut h = total;
        let mut t = total;
        for k in 0..=max_lag {
            if k > 0 {
                h -= x[n - k];
                t -= x[k - 1];
            }
            head[k] = h;
            tail[k] = t;
            lag[k] = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
        }
        BlockStats {
            n: n as f64,
            sum: total,
            sum_sq: x.iter().map(|v| v * v).sum(),
            lag,
            head,
            tail,
        }
    }

    fn correlation(blocks: &[&BlockStats]) -> Vec<f64> {
        let max_lag = blocks.iter().map(|b| b.lag.len()).min().unwrap_or(0);
        let n: f64 = blocks.iter().map(|b| b.n).sum();
        let mean = blocks.iter().map(|b| b.sum).sum::<f64>() / n;
        let var = blocks.iter().map(|b| b.sum_sq).sum::<f64>() / n - mean * mean;
        (0..max_lag)
            .map(|k| {
                let count: f64 = blocks.iter().map(|b| b.n - k as f64).sum();
                let s: f64 = blocks
                    .iter()
                    .map(|b| b.lag[k] - mean * (b.head[k] + b.tail[k]))
                    .sum::<f64>()
                    + mean * mean * count;
                if var > 0.0 {
                    s / count / var
                } else {
                    f64::NAN
                }
            })
            .collect()
    }
}

struct Fit {
    rate: f64,
    r2: f64,
    lags: (usize, usize),
    crossing: usize,
}

/// Fit `log C(k) ≈ a − rate·k·dt` over the window; `None` when there are
/// fewer than three points or no crossing of the lower edge.
fn fit(c: &[f64], dt: f64, window: (f64, f64)) -> Option<Fit> {
    let crossing = c.iter().position(|&v| !(v >= window.0))?;
    let pts: Vec<(f64, f64)> = (1..crossing)
        .filter(|&k| c[k] <= window.1)
        .map(|k| (k as f64 * dt, c[k].ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
    let first = (pts[0].0 / dt).round() as usize;
    let last = (pts[pts.len() - 1].0 / dt).round() as usize;
    Some(Fit {
        rate: -slope,
        r2,
        lags: (first, last),
        crossing,
    })
}

/// Estimate from a plan's sampled series; the bootstrap stream is derived
/// from the plan seed.
pub fn relaxation_estimate(series: &TimeSeries, plan: &SimulationPlan) -> Result<RelaxationEstimate> {
    relaxation_estimate_with(
        &series.values,
        series.dt,
        plan.seed ^ BOOTSTRAP_SALT,
        &EstimatorOptions::default(),
    )
}

pub fn relaxation_estimate_with(
    values: &[f64],
    dt: f64,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<RelaxationEstimate> {
    let n = values.len();
    if n < opts.min_samples {
        return Err(Error::InsufficientData {
            samples: n,
            required: opts.min_samples,
        });
    }
    let c = autocorrelation_until(values, opts.window.0, n / 4);
    let main = fit(&c, dt, opts.window).ok_or_else(|| {
        Error::NonDecayingCorrelation(format!(
            "fewer than three lags with C in [{}, {}] before the first crossing",
            opts.window.0, opts.window.1
        ))
    })?;
    if !(main.rate > 0.0) || main.r2 < opts.min_r2 {
        return Err(Error::NonDecayingCorrelation(format!(
            "fitted rate {:.4e} with r² = {:.3}",
            main.rate, main.r2
        )));
    }

    let horizon = 2 * main.crossing;
    let blocks = (n / (opts.block_horizons * horizon)).min(opts.max_blocks);
    if blocks < 10 {
        return Err(Error::InsufficientData {
            samples: n,
            required: 10 * opts.block_horizons * horizon,
        });
    }
    let len = n / blocks;
    let stats: Vec<BlockStats> = (0..blocks)
        .map(|b| BlockStats::new(&values[b * len..(b + 1) * len], horizon))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rates = Vec::with_capacity(opts.replicates);
    for _ in 0..opts.replicates {
        let pick: Vec<&BlockStats> = (0..blocks).map(|_| &stats[rng.random_range(0..blocks)]).collect();
        let c = BlockStats::correlation(&pick);
        if let Some(f) = fit(&c, dt, opts.window) {
            if f.rate.is_finite() {
                rates.push(f.rate);
            }
        }
    }
    if rates.len() < opts.replicates / 2 {
        return Err(Error::NonDecayingCorrelation(format!(
            "only {} of {} bootstrap replicates produced a fit",
            rates.len(),
            opts.replicates
        )));
    }
    let m = rates.iter().sum::<f64>() / rates.len() as f64;
    let var = rates.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (rates.len() - 1) as f64;
    Ok(RelaxationEstimate {
        rate: main.rate,
        stderr: var.sqrt(),
        n_samples: n,
        fit_lags: main.lags,
        r2: main.r2,
        blocks,
        replicates: rates.len(),
    })
}
