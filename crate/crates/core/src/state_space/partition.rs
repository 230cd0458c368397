use super::EnsembleParams;
use crate::combinatorics::{log_add, log_sum_exp};

/// Log-domain canonical partition functions of stick subsystems.
///
/// `log_g(n)` is the single-stick weight of `n` particles, the coefficient of
/// `z^n` in `Π_h (1 + q^{2h} z)`. `log_z(l, m)` is the partition function of
/// `l` sticks holding `m` particles, `Z_l(m) = Σ_n g(n) Z_{l-1}(m - n)`.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    ln_q: f64,
    height: usize,
    max_particles: usize,
    log_g: Vec<f64>,
    /// `log_z[l][m]` for `l ≤ L`, `m ≤ N`.
    log_z: Vec<Vec<f64>>,
}

impl PartitionTable {
    pub fn ln_q(&self) -> f64 {
        self.ln_q
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn log_g(&self, n: usize) -> f64 {
        self.log_g.get(n).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `-inf` for infeasible `(l, m)`, including `m` beyond the table.
    pub fn log_z(&self, sticks: usize, particles: usize) -> f64 {
        if particles > self.max_particles {
            return f64::NEG_INFINITY;
        }
        self.log_z
            .get(sticks)
            .map(|row| row[particles])
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Log weight `Σ 2h ln q` of a stick occupying the rows in `pattern`.
    pub fn log_stick_weight(&self, pattern: u64) -> f64 {
        let mut acc = 0.0;
        let mut bits = pattern;
        while bits != 0 {
            let r = bits.trailing_zeros() as usize;
            acc += 2.0 * (r + 1) as f64 * self.ln_q;
            bits &= bits - 1;
        }
        acc
    }
}

/// Dynamic program over sticks, `O(L·N·H)` log-sum-exp updates.
pub fn build_partition_table(params: &EnsembleParams) -> PartitionTable {
    let ln_q = params.q.ln();
    let h = params.height;
    let n_max = params.particles;

    let mut log_g = vec![f64::NEG_INFINITY; h + 1];
    log_g[0] = 0.0;
    for row in 1..=h {
        let w = 2.0 * row as f64 * ln_q;
        for n in (1..=row).rev() {
            log_g[n] = log_add(log_g[n], log_g[n - 1] + w);
        }
    }

    let mut log_z = Vec::with_capacity(params.sticks + 1);
    let mut first = vec![f64::NEG_INFINITY; n_max + 1];
    first[0] = 0.0;
    log_z.push(first);
    for l in 1..=params.sticks {
        let prev = &log_z[l - 1];
        let row: Vec<f64> = (0..=n_max)
            .map(|m| log_sum_exp((0..=h.min(m)).map(|n| log_g[n] + prev[m - n])))
            .collect();
        log_z.push(row);
    }

    PartitionTable {
        ln_q,
        height: h,
        max_particles: n_max,
        log_g,
        log_z,
    }
}
