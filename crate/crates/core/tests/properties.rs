use num_complex::Complex64;
use proptest::prelude::*;

use irrlab::irregularity::{envelope, interpolation_check, sup_norm};
use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::{occupation_density, phi, phi_table, FrequencySet, IntervalFamily};
use irrlab::{SampledPath, Seed};

fn bm(dim: usize, n: usize, seed: u64) -> SampledPath {
    simulate_gaussian(&GaussianModel::brownian(dim), n, 1.0, Seed::new(seed)).unwrap()
}

/// Random walk from a vector of increments, not a simulator draw.
fn walk(steps: &[f64]) -> SampledPath {
    let mut v = vec![0.0];
    for s in steps {
        v.push(v[v.len() - 1] + s);
    }
    SampledPath::new(1, 1.0, v).unwrap()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_hermitian(steps in prop::collection::vec(-0.5f64..0.5, 8..200), xi in -300f64..300.0, cut in 0.0f64..1.0) {
        let p = walk(&steps);
        let s = ((p.n() - 1) as f64 * cut) as usize;
        let a = phi(&p, s, p.n(), &[xi]).unwrap().value;
        let b = phi(&p, s, p.n(), &[-xi]).unwrap().value;
        prop_assert!(close(a, b.conj(), 1e-12));
    }

    #[test]
    fn phi_is_bounded_by_the_interval(steps in prop::collection::vec(-2.0f64..2.0, 4..200), xi in -1e3f64..1e3) {
        let p = walk(&steps);
        let v = phi(&p, 0, p.n(), &[xi]).unwrap().value;
        prop_assert!(v.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn phi_is_additive(seed in 0u64..1000, a in 0usize..256, b in 0usize..256, c in 0usize..256, x in -100f64..100.0, y in -100f64..100.0) {
        let p = bm(2, 256, seed);
        let mut k = [a, b, c];
        k.sort_unstable();
        let [s, u, t] = k;
        prop_assume!(s < u && u < t);
        let xi = [x, y];
        let whole = phi(&p, s, t, &xi).unwrap().value;
        let parts = phi(&p, s, u, &xi).unwrap().value + phi(&p, u, t, &xi).unwrap().value;
        prop_assert!(close(whole, parts, 1e-12));
    }

    #[test]
    fn phi_picks_up_the_shift_phase(steps in prop::collection::vec(-0.3f64..0.3, 8..100), shift in -5f64..5.0, xi in -50f64..50.0) {
        let p = walk(&steps);
        let q = p.transform(&[1.0], &[shift]).unwrap();
        let a = phi(&p, 0, p.n(), &[xi]).unwrap().value * Complex64::from_polar(1.0, xi * shift);
        let b = phi(&q, 0, q.n(), &[xi]).unwrap().value;
        prop_assert!(close(a, b, 1e-10));
    }

    #[test]
    fn envelope_grows_with_gamma_on_unit_horizon(seed in 0u64..500) {
        let p = bm(1, 512, seed);
        let table = phi_table(&p, &FrequencySet::new(1, 1.0, 10).unwrap(), IntervalFamily::new(5)).unwrap();
        let lo = envelope(&table, 0.55);
        let hi = envelope(&table, 0.8);
        prop_assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a <= b));
        let top = lo.values.iter().copied().fold(0.0, f64::max);
        prop_assert_eq!(sup_norm(&table, 0.55, 0.0), top);
    }

    #[test]
    fn interpolation_never_exceeds_the_bound(seed in 0u64..500, gamma in 0.5f64..0.95, rho in 0.0f64..1.5, theta in 0.05f64..0.95) {
        let p = bm(1, 512, seed);
        let table = phi_table(&p, &FrequencySet::new(1, 1.0, 10).unwrap(), IntervalFamily::new(5)).unwrap();
        prop_assert!(interpolation_check(&table, gamma, rho, theta).unwrap().holds);
    }

    #[test]
    fn occupation_mass_is_interval_length(seed in 0u64..500, dim in 1usize..=3, s in 0usize..128, len in 1usize..128, m in 8usize..24) {
        let p = bm(dim, 256, seed);
        let t = (s + len).min(256);
        let d = occupation_density(&p, s, t, m).unwrap();
        prop_assert!((d.mass() - (t - s) as f64 / 256.0).abs() < 1e-12);
        prop_assert!(d.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn binary_round_trip_is_exact(seed in 0u64..500, dim in 1usize..=3, n in 8usize..64) {
        let p = bm(dim, n, seed);
        let mut buf = Vec::new();
        p.write_binary(&mut buf).unwrap();
        prop_assert_eq!(SampledPath::read_binary(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn csv_round_trip_is_exact(seed in 0u64..500, n in 8usize..64) {
        let p = bm(2, n, seed);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        prop_assert_eq!(SampledPath::read_csv(buf.as_slice()).unwrap(), p);
    }
}

#[test]
fn seeds_select_independent_paths() {
    let model = GaussianModel::fbm(1, 0.7);
    let a = simulate_gaussian(&model, 128, 1.0, Seed::new(5)).unwrap();
    let b = simulate_gaussian(&model, 128, 1.0, Seed::new(5)).unwrap();
    let c = simulate_gaussian(&model, 128, 1.0, Seed::new(5).with_path(1)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn phi_of_a_quadratic_matches_fresnel_quadrature() {
    // w = t^2 on a fine grid against composite Simpson on the smooth integrand
    let n = 1 << 12;
    let p = SampledPath::from_scalar_fn(1.0, n, |t| t * t).unwrap();
    for xi in [1.0, 7.0, 20.0] {
        let m = 20_000;
        let h = 1.0 / m as f64;
        let f = |t: f64| Complex64::from_polar(1.0, xi * t * t);
        let mut acc = f(0.0) + f(1.0);
        for k in 1..m {
            acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let simpson = acc * h / 3.0;
        let got = phi(&p, 0, n, &[xi]).unwrap();
        assert!((got.value - simpson).norm() <= got.error_estimate, "ξ = {xi}");
    }
}
