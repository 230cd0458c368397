use asep_spectra::operators::{
    delta_of_q, full_generator, modified_generator, profile_generator, q_of_delta, xxz_chain_hamiltonian,
    DiagonalRegion, XXZParams,
};
use asep_spectra::simulate::{Mode, SimulationPlan};
use asep_spectra::spectral::dense_gap;
use asep_spectra::state_space::{
    build_partition_table, enumerate_lattice_configs, enumerate_profiles, EnsembleParams,
};
use proptest::prelude::*;

/// `(L, H, N)` with `L·H ≤ 12`.
fn small_sector() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=4, 1usize..=3).prop_flat_map(|(l, h)| (Just(l), Just(h), 0..=l * h))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn params_accept_exactly_the_valid_range(q in -0.5f64..1.5, l in 0usize..5, h in 0usize..5, n in 0usize..30) {
        let valid = q > 0.0 && q < 1.0 && l >= 1 && h >= 1 && n <= l * h;
        let p = EnsembleParams::new(q, l, h, n);
        prop_assert_eq!(p.is_ok(), valid);
        if let Ok(p) = p {
            prop_assert!(p.density() >= 0.0 && p.density() <= h as f64);
        }
    }

    #[test]
    fn lattice_and_profile_sectors_respect_counts(q in 0.05f64..0.95, (l, h, n) in small_sector()) {
        let p = EnsembleParams::new(q, l, h, n).unwrap();
        for a in enumerate_lattice_configs(&p, None).unwrap().iter() {
            prop_assert_eq!(a.particles(), n);
            prop_assert_eq!(a.sticks() * a.height(), l * h);
        }
        for w in enumerate_profiles(&p, None).unwrap().to_vec() {
            prop_assert_eq!(w.heights().len(), h);
            prop_assert!(w.heights().iter().all(|&x| x <= l));
            prop_assert_eq!(w.total(), n);
        }
    }

    #[test]
    fn partition_table_recursions(q in 0.05f64..0.95, l in 1usize..5, h in 1usize..5) {
        let p = EnsembleParams::new(q, l, h, l * h).unwrap();
        let t = build_partition_table(&p);
        // g(n) by brute force over subsets of rows
        let mut g = vec![0.0; h + 1];
        for mask in 0u32..(1 << h) {
            let w: f64 = (0..h).filter(|r| mask >> r & 1 == 1).map(|r| q.powi(2 * (r as i32 + 1))).product();
            g[mask.count_ones() as usize] += w;
        }
        for (n, gn) in g.iter().enumerate() {
            prop_assert!((t.log_g(n) - gn.ln()).abs() < 1e-12);
        }
        prop_assert!(t.log_z(0, 0).abs() < 1e-14);
        prop_assert_eq!(t.log_z(0, 1), f64::NEG_INFINITY);
        for m in 0..=l * h {
            let z: f64 = (0..=h.min(m))
                .map(|n| (t.log_g(n) + t.log_z(l - 1, m - n)).exp())
                .sum();
            prop_assert!((t.log_z(l, m) - z.ln()).abs() < 1e-12, "l={} m={}", l, m);
        }
    }

    #[test]
    fn generators_are_reversible(q in 0.05f64..0.95, (l, h, n) in small_sector()) {
        let p = EnsembleParams::new(q, l, h, n).unwrap();
        let mut ops = vec![full_generator(&p).unwrap(), profile_generator(&p).unwrap()];
        if l >= 2 {
            ops.push(modified_generator(&p).unwrap());
        }
        for op in ops {
            let c = op.check();
            prop_assert!(c.row_sum <= 1e-12, "{}: row sum {}", op.label(), c.row_sum);
            prop_assert!(c.detailed_balance <= 1e-12, "{}: balance {}", op.label(), c.detailed_balance);
            prop_assert!(c.negative_rate == 0.0);
        }
    }

    #[test]
    fn ergodic_sectors_have_positive_gap(q in 0.05f64..0.95, (l, h, n) in small_sector()) {
        prop_assume!(h >= 2 && n > 0 && n < l * h);
        let p = EnsembleParams::new(q, l, h, n).unwrap();
        let r = dense_gap(&full_generator(&p).unwrap()).unwrap();
        prop_assert!(r.gap > 1e-9);
        prop_assert!(r.residual <= 1e-9);
    }

    #[test]
    fn anisotropy_round_trip(q in 0.001f64..0.999, d in 1.0f64 + 1e-9..1e3) {
        let q2 = q_of_delta(d);
        prop_assert!(q2 > 0.0 && q2 < 1.0);
        prop_assert!((delta_of_q(q2) - d).abs() <= 1e-14 * d);
        // dq/dΔ = −q/sqrt(Δ² − 1): rounding in Δ is amplified near Δ = 1
        let dq = delta_of_q(q);
        let cond = dq / ((dq - 1.0) * (dq + 1.0)).sqrt();
        prop_assert!((q_of_delta(dq) - q).abs() <= 1e-14 + 4.0 * f64::EPSILON * cond);
    }

    #[test]
    fn xxz_sector_dimensions(ts in 1usize..4, h in 2usize..5, delta in 1.01f64..6.0) {
        for n2 in XXZParams::sectors(ts, h) {
            let x = XXZParams::new(ts, h, delta, n2).unwrap();
            // count m ∈ {−S..S}^H with Σ m = n directly
            let mut count = 0u128;
            let states = ts + 1;
            for code in 0..states.pow(h as u32) {
                let mut c = code;
                let mut sum2 = 0i64;
                for _ in 0..h {
                    sum2 += 2 * (c % states) as i64 - ts as i64;
                    c /= states;
                }
                count += u128::from(sum2 == n2);
            }
            prop_assert_eq!(x.dim(), count);
            prop_assert_eq!(xxz_chain_hamiltonian(&x).unwrap().nrows() as u128, count);
        }
    }

    #[test]
    fn diagonal_region_geometry(r in 0usize..4, h in 1usize..6) {
        let region = DiagonalRegion::new(r, h).unwrap();
        // the only empty region: a single odd level on the axis
        prop_assert_eq!(region.is_empty(), r == 0 && h == 1);
        for k in 0..region.len() {
            prop_assert!((1..=h).contains(&region.level(k)));
            prop_assert!(region.tilt(k).unsigned_abs() as usize <= r);
            prop_assert_eq!((region.tilt(k) + region.level(k) as i64).rem_euclid(2), 0);
        }
        for &(x, y) in &region.bonds {
            prop_assert_eq!(region.level(y), region.level(x) + 1);
            prop_assert_eq!((region.tilt(y) - region.tilt(x)).abs(), 1);
        }
    }

    #[test]
    fn plans_require_ordered_times(t_burn in -5.0f64..50.0, t_run in -5.0f64..100.0, dt in -0.1f64..1.0) {
        let p = EnsembleParams::new(0.5, 2, 3, 3).unwrap();
        let ok = SimulationPlan::new(p, Mode::Profile, 1, t_burn, t_run, dt).is_ok();
        if t_burn < 0.0 || t_run <= t_burn || dt <= 0.0 {
            prop_assert!(!ok);
        }
    }
}
