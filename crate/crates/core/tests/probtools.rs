mod common;

use common::*;
use majorant_lab::probtools::{
    centered_square_ratio_empirical, centered_square_ratio_exact, gaussian_tail, ldt_bound, ldt_empirical,
    mgf_holds, mgf_inequality_check, mgf_probe_threshold, moment_bound_check, salem_zygmund_check,
    sz2_perturbed_ap,
};
use majorant_lab::setgen::Seed;
use num_complex::Complex64;

#[test]
fn large_deviation_example() {
    let ones = vec![Complex64::new(1.0, 0.0); 1000];
    let r = ldt_empirical(&ones, 0.3, &[0.0, 2.0, 4.0], 100_000, Seed::new(1)).unwrap();
    assert!(r.condition_ok.iter().all(|&c| c));
    assert!(r.exceed_freq[0] <= 1.0);
    assert!((r.bound[2] - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
    assert!(r.exceed_freq[2] <= r.bound[2]);
    // close to the Gaussian tail 2Φ(−4) ≈ 6.3e−5
    assert!(r.exceed_freq[2] < 10.0 * gaussian_tail(4.0));
    assert!((r.exceed_freq[1] - gaussian_tail(2.0)).abs() < 0.01);
    assert!(r.violations().is_empty());
}

#[test]
fn bound_decreases_in_lambda() {
    let l: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
    for w in l.windows(2) {
        assert!(ldt_bound(w[1]) < ldt_bound(w[0]));
    }
}

#[test]
fn complex_weights_respect_bound() {
    let a: Vec<Complex64> = (0..200).map(|j| Complex64::from_polar(1.0 + (j % 3) as f64, j as f64 * 0.7)).collect();
    let r = ldt_empirical(&a, 0.05, &[1.0, 2.0, 3.0, 4.0, 5.0], 20_000, Seed::new(2)).unwrap();
    assert!(r.violations().is_empty());
}

#[test]
fn mgf_grid_and_probe() {
    let taus: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
    let xs: Vec<f64> = (-1000..=1000).map(|i| i as f64 / 1000.0).collect();
    let r = mgf_inequality_check(&taus, &xs).unwrap();
    assert!(r.grid_ok());
    for p in &r.probes {
        assert_eq!(p.holds, p.tau > 0.035, "tau {}", p.tau);
    }
    let t = mgf_probe_threshold();
    assert!(!mgf_holds(t * 0.999, (t * 0.999).powf(-0.5)));
    assert!(mgf_holds(t * 1.001, (t * 1.001).powf(-0.5)));
    assert!(mgf_holds(0.04, 0.04f64.powf(-0.5)));
}

#[test]
fn moments_against_stirling_oracle() {
    let m = moment_bound_check(100, 0.1, 5).unwrap();
    let o = binomial_moment_stirling(100, 0.1, 5);
    assert!((m.exact - o).abs() < 1e-11 * o && m.ok);
    for n in 1..=100 {
        for q in 1..=10 {
            for tau in [0.01, 0.1, 0.5, 0.9] {
                let m = moment_bound_check(n, tau, q).unwrap();
                let o = binomial_moment_stirling(n, tau, q);
                assert!((m.exact - o).abs() <= 1e-9 * o, "{n} {q} {tau}");
                assert!(m.ok);
            }
        }
    }
    let big = moment_bound_check(10_000, 0.3, 30).unwrap();
    assert!(big.log_exact.is_finite() && big.ok);
}

#[test]
fn salem_zygmund_at_4096() {
    let ones = vec![Complex64::new(1.0, 0.0); 4096];
    let r = salem_zygmund_check(4096, 0.5, &ones, 200, Seed::new(3)).unwrap();
    assert!(r.conditions.hold() && r.skipped.is_none());
    assert_eq!(r.violations, 0);
    assert_eq!(r.grid_points, 4 * 4096);
    assert!(r.bound < 1e-28);
}

#[test]
fn sz2_constant_is_reported() {
    let r = sz2_perturbed_ap(64, 4, 12, 50, Seed::new(4)).unwrap();
    assert!(r.normalized_max.is_finite() && r.normalized_max > 0.0);
    assert!(r.normalized_mean <= r.normalized_max);
    assert!(sz2_perturbed_ap(64, 6, 12, 5, Seed::new(4)).is_err());
}

#[test]
fn centered_square_moments() {
    for (i, tau) in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95].into_iter().enumerate() {
        let e = centered_square_ratio_empirical(tau, 200_000, Seed::new(50 + i as u64)).unwrap();
        let x = centered_square_ratio_exact(tau);
        assert!((e - x).abs() < 0.02, "{tau}: {e} vs {x}");
        if !(0.25..0.75).contains(&tau) || tau == 0.25 || tau == 0.75 {
            assert!((0.2..=5.0).contains(&e), "{tau}: {e}");
        }
    }
}
