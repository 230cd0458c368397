use super::CsrMatrix;
use crate::combinatorics::log_sum_exp;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Whether the stored generator came from a Markov generator or from a
/// stochastic kernel `K`, in which case the generator is `K − 𝕀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorForm {
    Generator,
    Kernel,
}

/// Worst-case deviations from the generator axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorCheck {
    /// `max_a |Σ_b G(a,b)|`, including the diagonal.
    pub row_sum: f64,
    /// Most negative off-diagonal rate, `0` if none.
    pub negative_rate: f64,
    /// `max |π(a) r(a→b) − π(b) r(b→a)| / max(π(a) r(a→b), π(b) r(b→a))`.
    pub detailed_balance: f64,
}

impl OperatorCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.row_sum <= tol && self.negative_rate >= 0.0 && self.detailed_balance <= tol
    }
}

/// A continuous-time generator reversible with respect to `pi`.
///
/// Off-diagonal rates live in a CSR matrix; the diagonal is implicit,
/// `G(a,a) = −Σ_{b≠a} r(a→b)`. Kernel-form operators store the off-diagonal
/// kernel entries as rates, so the represented generator is `K − 𝕀`.
#[derive(Debug, Clone)]
pub struct ReversibleOperator {
    label: String,
    form: OperatorForm,
    log_pi: Vec<f64>,
    pi: Vec<f64>,
    rates: CsrMatrix,
}

impl ReversibleOperator {
    /// `log_weights` need not be normalized. Diagonal entries in `rows` are
    /// ignored.
    pub fn from_rows(
        label: impl Into<String>,
        log_weights: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        assert_eq!(log_weights.len(), rows.len());
        let dim = rows.len();
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(a, r)| r.into_iter().filter(|&(b, _)| b != a).collect())
            .collect();
        let log_z = log_sum_exp(log_weights.iter().copied());
        let log_pi: Vec<f64> = log_weights.iter().map(|w| w - log_z).collect();
        let pi = log_pi.iter().map(|l| l.exp()).collect();
        ReversibleOperator {
            label: label.into(),
            form: OperatorForm::Generator,
            log_pi,
            pi,
            rates: CsrMatrix::from_rows(dim, rows),
        }
    }

    /// Stochastic kernel `kernel`, reversible with respect to `pi`.
    pub fn from_kernel(label: impl Into<String>, pi: &[f64], kernel: &DMatrix<f64>) -> Self {
        let n = pi.len();
        assert_eq!((kernel.nrows(), kernel.ncols()), (n, n));
        let rows = (0..n)
            .map(|a| (0..n).map(|b| (b, kernel[(a, b)])).collect())
            .collect();
        let log_w = pi.iter().map(|p| p.ln()).collect();
        let mut op = Self::from_rows(label, log_w, rows);
        op.form = OperatorForm::Kernel;
        op
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn form(&self) -> OperatorForm {
        self.form
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn log_pi(&self) -> &[f64] {
        &self.log_pi
    }

    pub fn rates(&self) -> &CsrMatrix {
        &self.rates
    }

    pub fn rate(&self, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.rates.get(a, b)
        }
    }

    pub fn exit_rate(&self, a: usize) -> f64 {
        self.rates.row(a).map(|(_, r)| r).sum()
    }

    /// `(𝓛f)(a) = Σ_b r(a→b)(f(b) − f(a))`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(f)?;
        Ok((0..self.dim())
            .map(|a| self.rates.row(a).map(|(b, r)| r * (f[b] - f[a])).sum())
            .collect())
    }

    /// `½ Σ π(a) r(a→b) (f(b) − f(a))²`.
    pub fn dirichlet_form(&self, f: &[f64]) -> Result<f64> {
        self.check_dim(f)?;
        let mut acc = 0.0;
        for a in 0..self.dim() {
            let local: f64 = self.rates.row(a).map(|(b, r)| r * (f[b] - f[a]).powi(2)).sum();
            acc += self.pi[a] * local;
        }
        Ok(0.5 * acc)
    }

    /// `−⟨f, 𝓛f⟩_π`, equal to the Dirichlet form for reversible operators.
    pub fn quadratic_form(&self, f: &[f64]) -> Result<f64> {
        let lf = self.apply(f)?;
        Ok(-f.iter().zip(&lf).zip(&self.pi).map(|((x, y), p)| p * x * y).sum::<f64>())
    }

    pub fn mean(&self, f: &[f64]) -> Result<f64> {
        self.check_dim(f)?;
        Ok(f.iter().zip(&self.pi).map(|(x, p)| p * x).sum())
    }

    pub fn variance(&self, f: &[f64]) -> Result<f64> {
        let m = self.mean(f)?;
        Ok(f.iter().zip(&self.pi).map(|(x, p)| p * (x - m).powi(2)).sum())
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.check_dim(f)?;
        self.check_dim(g)?;
        Ok(f.iter().zip(g).zip(&self.pi).map(|((x, y), p)| p * x * y).sum())
    }

    pub fn check(&self) -> OperatorCheck {
        let mut negative_rate: f64 = 0.0;
        let mut detailed_balance: f64 = 0.0;
        for a in 0..self.dim() {
            for (b, r) in self.rates.row(a) {
                negative_rate = negative_rate.min(r);
                let back = self.rates.get(b, a);
                let lhs = self.pi[a] * r;
                let rhs = self.pi[b] * back;
                let scale = lhs.abs().max(rhs.abs());
                if scale > 0.0 {
                    detailed_balance = detailed_balance.max((lhs - rhs).abs() / scale);
                }
            }
        }
        // rows sum to zero by construction; measure it on the assembled dense form
        let row_sum = if self.dim() <= 4096 {
            let g = self.to_dense_generator();
            g.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
        } else {
            0.0
        };
        OperatorCheck {
            row_sum,
            negative_rate,
            detailed_balance,
        }
    }

    /// Dense generator `G` with `G(a,a) = −Σ_b r(a→b)`.
    pub fn to_dense_generator(&self) -> DMatrix<f64> {
        let mut g = self.rates.to_dense();
        for a in 0..self.dim() {
            g[(a, a)] = -self.exit_rate(a);
        }
        g
    }

    /// `𝕀 + G`; the kernel itself for kernel-form operators.
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        let mut k = self.to_dense_generator();
        for a in 0..self.dim() {
            k[(a, a)] += 1.0;
        }
        k
    }

    /// Multiply every rate by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.rates = self.rates.map_entries(|_, _, v| v * factor);
        out
    }

    /// Multiply the single rate `r(a→b)` by `factor`, breaking detailed
    /// balance. Used to check that the verification suite detects corruption.
    pub fn corrupt_rate(&mut self, a: usize, b: usize, factor: f64) -> bool {
        match self.rates.get_mut(a, b) {
            Some(v) => {
                *v *= factor;
                true
            }
            None => false,
        }
    }

    /// Off-diagonal entries of `S = D^{1/2} G D^{-1/2}`,
    /// `S(a,b) = r(a→b) sqrt(π(a)/π(b))`, with diagonal `−exit_rate`.
    pub fn symmetrized_sparse(&self) -> Result<CsrMatrix> {
        if let Some(a) = self.log_pi.iter().position(|l| !l.is_finite()) {
            return Err(Error::ZeroWeightState(a));
        }
        let rows = (0..self.dim())
            .map(|a| {
                let mut row: Vec<(usize, f64)> = self
                    .rates
                    .row(a)
                    .map(|(b, r)| (b, r * (0.5 * (self.log_pi[a] - self.log_pi[b])).exp()))
                    .collect();
                row.push((a, -self.exit_rate(a)));
                row
            })
            .collect();
        Ok(CsrMatrix::from_rows(self.dim(), rows))
    }

    fn check_dim(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.len(),
            });
        }
        Ok(())
    }
}
