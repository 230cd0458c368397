//! Counting, ranking and log-domain helpers shared by the state spaces.
//!
//! Fixed-weight bit sets are ordered colexicographically, which coincides with
//! increasing integer value of the bit mask, so Gosper's successor enumerates
//! a sector in rank order. Bounded compositions (profiles, spin sectors) are
//! ordered reverse-lexicographically: the first coordinate is largest first.

use crate::error::{Error, Result};

/// Largest number of sites a bit-mask configuration can hold.
pub const MAX_SITES: usize = 64;

/// Exact binomial coefficient, `0` when `k > n`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + i) / i;
    }
    acc
}

/// Natural log of a binomial coefficient, exact summation of logs.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64).ln() - (i as f64).ln())
        .sum()
}

/// `ln(Σ exp(x_i))` without overflow; empty or all `-inf` input gives `-inf`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let xs: Vec<f64> = values.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Pascal triangle up to 64, used by the colex ranking.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    rows: Vec<Vec<u64>>,
}

impl BinomialTable {
    pub fn new() -> Self {
        let mut rows = vec![vec![1u64]];
        for n in 1..=MAX_SITES {
            let prev = &rows[n - 1];
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = prev[k - 1] + prev[k];
            }
            rows.push(row);
        }
        BinomialTable { rows }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.rows[n][k]
        }
    }
}

impl Default for BinomialTable {
    fn default() -> Self {
        Self::new()
    }
}

/// Colex rank of a bit mask: `Σ_k C(c_k, k)` over the set bits `c_1 < c_2 < …`.
pub fn colex_rank(table: &BinomialTable, mut bits: u64) -> u64 {
    let mut rank = 0;
    let mut k = 1;
    while bits != 0 {
        let c = bits.trailing_zeros() as usize;
        rank += table.get(c, k);
        k += 1;
        bits &= bits - 1;
    }
    rank
}

/// Inverse of [`colex_rank`] for masks with `weight` set bits.
pub fn colex_unrank(table: &BinomialTable, mut rank: u64, weight: usize) -> u64 {
    let mut bits = 0u64;
    for k in (1..=weight).rev() {
        // largest c with C(c, k) <= rank
        let mut c = k - 1;
        while c + 1 < MAX_SITES && table.get(c + 1, k) <= rank {
            c += 1;
        }
        rank -= table.get(c, k);
        bits |= 1u64 << c;
    }
    bits
}

/// Next mask with the same popcount in increasing order (Gosper's hack).
#[inline]
pub fn next_same_weight(bits: u64) -> Option<u64> {
    if bits == 0 {
        return None;
    }
    let c = bits & bits.wrapping_neg();
    let r = bits.checked_add(c)?;
    Some((((r ^ bits) >> 2) / c) | r)
}

/// The set `{ω : 0 ≤ ω_p ≤ upper_p, Σ ω_p = total}` with rank/unrank.
#[derive(Debug, Clone)]
pub struct BoundedCompositions {
    upper: Vec<usize>,
    total: usize,
    /// `suffix[p][s]` = number of ways positions `p..` sum to `s`.
    suffix: Vec<Vec<u128>>,
}

impl BoundedCompositions {
    pub fn new(upper: Vec<usize>, total: usize) -> Self {
        let parts = upper.len();
        let mut suffix = vec![vec![0u128; total + 1]; parts + 1];
        suffix[parts][0] = 1;
        for p in (0..parts).rev() {
            for s in 0..=total {
                let mut acc = 0u128;
                for v in 0..=upper[p].min(s) {
                    acc += suffix[p + 1][s - v];
                }
                suffix[p][s] = acc;
            }
        }
        BoundedCompositions {
            upper,
            total,
            suffix,
        }
    }

    pub fn len(&self) -> u128 {
        self.suffix[0][self.total]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parts(&self) -> usize {
        self.upper.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn upper(&self) -> &[usize] {
        &self.upper
    }

    pub fn contains(&self, omega: &[usize]) -> bool {
        omega.len() == self.upper.len()
            && omega.iter().zip(&self.upper).all(|(w, u)| w <= u)
            && omega.iter().sum::<usize>() == self.total
    }

    pub fn rank(&self, omega: &[usize]) -> Result<u64> {
        if !self.contains(omega) {
            return Err(Error::InvalidParams(format!(
                "{omega:?} is not in the composition set"
            )));
        }
        let mut rank = 0u128;
        let mut remaining = self.total;
        for (p, &w) in omega.iter().enumerate() {
            for v in (w + 1)..=self.upper[p].min(remaining) {
                rank += self.suffix[p + 1][remaining - v];
            }
            remaining -= w;
        }
        Ok(rank as u64)
    }

    pub fn unrank(&self, rank: u64) -> Vec<usize> {
        let mut rank = rank as u128;
        let mut remaining = self.total;
        let mut out = Vec::with_capacity(self.upper.len());
        for p in 0..self.upper.len() {
            let mut v = self.upper[p].min(remaining);
            loop {
                let block = self.suffix[p + 1][remaining - v];
                if rank < block {
                    break;
                }
                rank -= block;
                v -= 1;
            }
            out.push(v);
            remaining -= v;
        }
        out
    }

    /// All members in rank order.
    pub fn to_vec(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.len() as usize);
        let mut current = vec![0usize; self.upper.len()];
        self.fill(0, self.total, &mut current, &mut out);
        out
    }

    fn fill(&self, p: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == self.upper.len() {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in (0..=self.upper[p].min(remaining)).rev() {
            if self.suffix[p + 1][remaining - v] == 0 {
                continue;
            }
            cur[p] = v;
            self.fill(p + 1, remaining - v, cur, out);
        }
    }
}
