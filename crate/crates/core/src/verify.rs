//! The built-in suite of exact identities, run on a grid of small sectors.

use crate::error::{invalid, Result};
use crate::operators::{
    bernoulli_laplace, conjugate_to_profile, diagonal_conjugation, diagonal_ground_state,
    diagonal_hamiltonian, diagonal_profile_generator, full_generator, lifted_diagonal_generator,
    profile_generator, xxz_chain_hamiltonian, xxz_ground_state, DiagonalRegion, ReversibleOperator,
    XXZParams,
};
use crate::spectral::{
    dense_gap, identity_checks, k_spectrum_report, multiset_contains, multiset_distance, recursion_report,
    symmetric_spectrum, ZERO_THRESHOLD,
};
use crate::state_space::EnsembleParams;
use std::time::Instant;

/// Names accepted by [`VerifyOptions::filter`], in run order.
pub const CHECK_NAMES: &[&str] = &[
    "generator-axioms",
    "k-spectrum",
    "variance-decomposition",
    "projection-identity",
    "class-a",
    "recursion",
    "lumping",
    "xxz-equivalence",
    "xxz-ground-state",
    "diagonal-equivalence",
    "diagonal-ground-state",
    "diagonal-lifting",
    "closed-form",
    "bernoulli-laplace",
];

/// Deliberate damage used to confirm that the suite detects it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Multiply the first off-diagonal rate of every full generator by this
    /// factor.
    CorruptFullGenerator(f64),
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Keep only checks whose name contains this string.
    pub filter: Option<String>,
    pub qs: Vec<f64>,
    pub max_sticks: usize,
    pub max_height: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            filter: None,
            qs: vec![0.3, 0.5, 0.8],
            max_sticks: 4,
            max_height: 3,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyRow {
    pub check: &'static str,
    pub instance: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

impl VerifyRow {
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{:<22} {:<28} {:>10} {status} ({e})", self.check, self.instance, "-"),
            None => format!("{:<22} {:<28} {:>10.3e} {status}", self.check, self.instance, self.deviation),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    /// One row per check name: the worst deviation over its instances.
    pub fn summary(&self) -> Vec<VerifyRow> {
        let mut out: Vec<VerifyRow> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|s| s.check == r.check) {
                Some(s) => {
                    let worse = (s.passed && !r.passed) || (s.passed == r.passed && r.deviation > s.deviation);
                    if worse {
                        *s = r.clone();
                    }
                }
                None => out.push(r.clone()),
            }
        }
        out
    }
}

struct Suite<'a> {
    opts: &'a VerifyOptions,
    rows: Vec<VerifyRow>,
}

impl Suite<'_> {
    fn enabled(&self, name: &str) -> bool {
        self.opts.filter.as_deref().map_or(true, |f| name.contains(f))
    }

    fn record(&mut self, check: &'static str, instance: String, outcome: Result<f64>, tolerance: f64) {
        let row = match outcome {
            Ok(d) => VerifyRow {
                check,
                instance,
                deviation: d,
                tolerance,
                passed: d <= tolerance,
                error: None,
            },
            Err(e) => VerifyRow {
                check,
                instance,
                deviation: f64::NAN,
                tolerance,
                passed: false,
                error: Some(e.to_string()),
            },
        };
        self.rows.push(row);
    }

    fn generator(&self, p: &EnsembleParams) -> Result<ReversibleOperator> {
        let mut op = full_generator(p)?;
        if let Some(Fault::CorruptFullGenerator(factor)) = self.opts.fault {
            let first = op.rates().row(0).next().map(|(b, _)| b);
            if let Some(b) = first {
                op.corrupt_rate(0, b, factor);
            }
        }
        Ok(op)
    }

    fn grid(&self) -> Vec<EnsembleParams> {
        let mut out = Vec::new();
        for &q in &self.opts.qs {
            for l in 1..=self.opts.max_sticks {
                for h in 1..=self.opts.max_height {
                    for n in 1..l * h {
                        out.push(EnsembleParams { q, sticks: l, height: h, particles: n });
                    }
                }
            }
        }
        out
    }
}

fn label(p: &EnsembleParams) -> String {
    format!("q={} L={} H={} N={}", p.q, p.sticks, p.height, p.particles)
}

fn label_xxz(x: &XXZParams) -> String {
    format!("D={} 2S={} H={} 2n={}", x.delta, x.twice_s, x.height, x.sector_2n)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Run the suite.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(f) = &opts.filter {
        if !CHECK_NAMES.iter().any(|n| n.contains(f.as_str())) {
            return Err(invalid(format!("filter {f:?} matches no check; known: {}", CHECK_NAMES.join(", "))));
        }
    }
    let start = Instant::now();
    let mut s = Suite { opts, rows: Vec::new() };
    let grid = s.grid();

    if s.enabled("generator-axioms") {
        for p in &grid {
            let out = s.generator(p).map(|op| {
                let c = op.check();
                c.row_sum.max(c.negative_rate).max(c.detailed_balance)
            });
            s.record("generator-axioms", label(p), out, 1e-12);
        }
    }

    if s.enabled("k-spectrum") {
        for p in grid.iter().filter(|p| p.sticks >= 2) {
            match k_spectrum_report(p) {
                Err(crate::Error::DegenerateSector) => continue,
                r => s.record("k-spectrum", label(p), r.map(|r| r.nbar_residual), 1e-10),
            }
        }
    }

    let identities = ["variance-decomposition", "projection-identity", "class-a"];
    if identities.iter().any(|n| s.enabled(n)) {
        for p in grid.iter().filter(|p| p.sticks >= 2) {
            match identity_checks(p) {
                Ok(checks) => {
                    for (name, c) in identities.iter().zip(checks) {
                        if s.enabled(name) {
                            s.record(name, label(p), Ok(c.deviation), c.tolerance);
                        }
                    }
                }
                Err(e) => {
                    for name in identities {
                        if s.enabled(name) {
                            s.record(name, label(p), Err(e.clone()), 0.0);
                        }
                    }
                }
            }
        }
    }

    if s.enabled("recursion") && opts.max_sticks >= 4 {
        for &q in &opts.qs {
            let p = EnsembleParams { q, sticks: 4, height: 2, particles: 4 };
            let out = recursion_report(&p).map(|r| r.checks[3].deviation);
            s.record("recursion", format!("q={q} L=4 H=2"), out, 1e-9);
        }
    }

    if s.enabled("lumping") {
        for p in grid.iter().filter(|p| p.height >= 2) {
            let out = (|| {
                let full = dense_gap(&s.generator(p)?)?;
                let prof = dense_gap(&profile_generator(p)?)?;
                let (ok, dev) = multiset_contains(&full.eigenvalues, &prof.eigenvalues, 1e-10);
                Ok(if ok { dev } else { f64::INFINITY })
            })();
            s.record("lumping", label(p), out, 1e-10);
        }
    }

    let chains = [(1, 2), (1, 3), (2, 2), (3, 2)];
    let deltas = [1.25, 2.0, 5.0];
    if s.enabled("xxz-equivalence") || s.enabled("xxz-ground-state") {
        for &(ts, h) in &chains {
            for &d in &deltas {
                for n2 in XXZParams::sectors(ts, h) {
                    let x = XXZParams::new(ts, h, d, n2)?;
                    if s.enabled("xxz-equivalence") {
                        let out = (|| {
                            let c = conjugate_to_profile(&x)?;
                            let spec_h = symmetric_spectrum(&xxz_chain_hamiltonian(&x)?);
                            let spec_g: Vec<f64> = match dense_gap(&profile_generator(&x.ensemble())?) {
                                Ok(r) => r.eigenvalues.iter().map(|v| v * x.spin() / d).collect(),
                                Err(crate::Error::DegenerateSector) => vec![0.0],
                                Err(e) => return Err(e),
                            };
                            Ok(c.residual.max(multiset_distance(&spec_h, &spec_g)))
                        })();
                        s.record("xxz-equivalence", label_xxz(&x), out, 1e-10);
                    }
                    if s.enabled("xxz-ground-state") {
                        let out = (|| {
                            let psi = xxz_ground_state(&x)?;
                            Ok(norm(&xxz_chain_hamiltonian(&x)?.mul_vec(&psi)))
                        })();
                        s.record("xxz-ground-state", label_xxz(&x), out, 1e-10);
                    }
                }
            }
        }
    }

    let regions = [(1, 2, 1), (1, 3, 1), (2, 2, 1), (1, 2, 2)];
    for &(r, h, ts) in &regions {
        let region = DiagonalRegion::new(r, h)?;
        for &d in &deltas {
            for n2 in region.sectors(ts) {
                let inst = format!("D={d} 2S={ts} R={r} H={h} 2n={n2}");
                if s.enabled("diagonal-equivalence") {
                    let out = (|| {
                        let c = diagonal_conjugation(&region, ts, d, n2)?;
                        let spec_h = symmetric_spectrum(&diagonal_hamiltonian(&region, ts, d, n2)?);
                        let n = region.particles(ts, n2)?;
                        let spec_g: Vec<f64> = match dense_gap(&diagonal_profile_generator(&region, ts, d, n)?) {
                            Ok(r) => r.eigenvalues.iter().map(|v| v * 0.5 / d).collect(),
                            Err(crate::Error::DegenerateSector) => vec![0.0],
                            Err(e) => return Err(e),
                        };
                        Ok(c.residual.max(multiset_distance(&spec_h, &spec_g)))
                    })();
                    s.record("diagonal-equivalence", inst.clone(), out, 1e-10);
                }
                if s.enabled("diagonal-ground-state") {
                    let out = (|| {
                        let psi = diagonal_ground_state(&region, ts, d, n2)?;
                        Ok(norm(&diagonal_hamiltonian(&region, ts, d, n2)?.mul_vec(&psi)))
                    })();
                    s.record("diagonal-ground-state", inst.clone(), out, 1e-10);
                }
                if s.enabled("diagonal-lifting") {
                    let n = region.particles(ts, n2)?;
                    let out = (|| {
                        let lifted = dense_gap(&lifted_diagonal_generator(&region, ts, d, n)?.scaled(ts as f64))?;
                        let prof = dense_gap(&diagonal_profile_generator(&region, ts, d, n)?)?;
                        let (ok, dev) = multiset_contains(&lifted.eigenvalues, &prof.eigenvalues, 1e-10);
                        Ok(if ok { dev } else { f64::INFINITY })
                    })();
                    match out {
                        Err(crate::Error::DegenerateSector) => {}
                        out => s.record("diagonal-lifting", inst, out, 1e-10),
                    }
                }
            }
        }
    }

    if s.enabled("closed-form") {
        for &q in &opts.qs {
            let p = EnsembleParams { q, sticks: 1, height: 2, particles: 1 };
            let out = dense_gap(&s.generator(&p)?).map(|r| (r.gap - (q + 1.0 / q)).abs());
            s.record("closed-form", format!("gap(L) {}", label(&p)), out, 1e-12);
        }
        for &d in &deltas {
            let x = XXZParams::new(1, 2, d, 0)?;
            let out = xxz_chain_hamiltonian(&x).map(|h| {
                let spec = symmetric_spectrum(&h);
                let gap = spec.iter().copied().find(|&v| v >= ZERO_THRESHOLD).unwrap_or(f64::NAN);
                (gap - 1.0).abs()
            });
            s.record("closed-form", format!("gap(H) {}", label_xxz(&x)), out, 1e-10);
        }
    }

    if s.enabled("bernoulli-laplace") {
        for l in 3..=5 {
            for n in 1..l {
                let out = bernoulli_laplace(l, n).and_then(|op| dense_gap(&op)).map(|r| (1.0 / r.gap - 0.5).abs());
                s.record("bernoulli-laplace", format!("L={l} N={n}"), out, 1e-10);
            }
        }
    }

    Ok(VerifyReport {
        rows: s.rows,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions {
            qs: vec![0.5],
            max_sticks: 3,
            max_height: 2,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn small_grid_passes() {
        let r = run_verify(&small()).unwrap();
        if let Some(row) = r.failures().next() {
            panic!("{}", row.line());
        }
        let names: Vec<&str> = r.summary().iter().map(|s| s.check).collect();
        for n in CHECK_NAMES.iter().filter(|n| **n != "recursion") {
            assert!(names.contains(n), "{n} missing");
        }
    }

    #[test]
    fn filter_selects_one_check() {
        let opts = VerifyOptions {
            filter: Some("k-spectrum".into()),
            ..small()
        };
        let r = run_verify(&opts).unwrap();
        assert!(!r.rows.is_empty());
        assert!(r.rows.iter().all(|row| row.check == "k-spectrum"));
        let opts = VerifyOptions {
            filter: Some("nonsense".into()),
            ..small()
        };
        assert!(run_verify(&opts).is_err());
    }

    #[test]
    fn corrupted_generator_is_caught() {
        let opts = VerifyOptions {
            fault: Some(Fault::CorruptFullGenerator(1.5)),
            ..small()
        };
        let r = run_verify(&opts).unwrap();
        assert!(!r.passed());
        let failed: Vec<&str> = r.failures().map(|f| f.check).collect();
        assert!(failed.contains(&"generator-axioms"));
        assert!(failed.contains(&"lumping"));
        assert!(!failed.contains(&"bernoulli-laplace"));
    }
}
