mod common;

use common::*;
use majorant_lab::expsum::{
    autocorrelation, dirichlet_even_moment, dirichlet_norm, evaluate_on_grid, lp_norm, lp_norm_even_exact, norm_auto,
    CoefficientSeq, DomainTag, FrequencySet, GridSpec, NormMethod,
};
use majorant_lab::setgen::{gen_ap, gen_squares};
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_instance(max_n: usize, max_len: usize) -> impl Strategy<Value = (FrequencySet, Vec<Complex64>)> {
    (1..=max_n, any::<u64>()).prop_map(move |(n, s)| {
        let mut r = rng(s);
        let set = random_set(&mut r, n, max_len);
        let vals = random_disk(&mut r, set.len());
        (set, vals)
    })
}

fn seq(set: &FrequencySet, vals: &[Complex64]) -> CoefficientSeq<f64> {
    CoefficientSeq::new(set.clone(), vals.to_vec(), DomainTag::Unconstrained).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quadrature_matches_convolution_oracle((set, vals) in arb_instance(200, 64), k in 1u32..=4) {
        let q = lp_norm(&seq(&set, &vals), 2.0 * k as f64, &GridSpec::default_for(set.ambient_size())).unwrap();
        let o = even_norm_oracle(&set, &vals, k);
        prop_assert!((q - o).abs() <= 1e-9 * o.max(1e-300));
    }

    #[test]
    fn plancherel((set, vals) in arb_instance(300, 64)) {
        let c = seq(&set, &vals);
        let two = lp_norm(&c, 2.0, &GridSpec::default_for(set.ambient_size())).unwrap();
        prop_assert!((two * two - c.l2_norm_sq()).abs() <= 1e-10 * c.l2_norm_sq().max(1.0));
    }

    #[test]
    fn autocorrelation_is_fourier_of_modulus_squared((set, vals) in arb_instance(120, 40)) {
        let c = seq(&set, &vals);
        let grid = GridSpec::default_for(set.ambient_size());
        let f = evaluate_on_grid(&c, &grid).unwrap();
        let ac = autocorrelation(&c);
        let m = grid.points();
        for j in (0..m).step_by(7) {
            let theta = j as f64 / m as f64;
            let s: Complex64 = ac
                .iter()
                .map(|(l, v)| v * Complex64::from_polar(1.0, std::f64::consts::TAU * l as f64 * theta))
                .sum();
            prop_assert!(s.re >= -1e-9);
            prop_assert!((s.re - f[j].norm_sqr()).abs() <= 1e-9 * c.l2_norm_sq().max(1.0) * set.len() as f64);
            prop_assert!(s.im.abs() <= 1e-9 * c.l2_norm_sq().max(1.0) * set.len() as f64);
        }
    }

    #[test]
    fn norms_increase_with_p((set, vals) in arb_instance(100, 32)) {
        let c = seq(&set, &vals);
        let grid = GridSpec::default_for(set.ambient_size());
        let ps = [1.0, 1.5, 2.0, 3.0, 4.0, 6.5, 8.0];
        let norms: Vec<f64> = ps.iter().map(|&p| lp_norm(&c, p, &grid).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn obvious_lower_bound(n in 1usize..400, s in any::<u64>(), p in 2.0f64..8.0) {
        let mut r = rng(s);
        let set = random_set(&mut r, n, n);
        let d = dirichlet_norm(&set, p, &GridSpec::default_for(n)).unwrap();
        let k = set.len() as f64;
        prop_assert!(d.powf(p) >= 1e-2 * k.powf(p) / n as f64);
    }
}

#[test]
fn grid_values_match_direct_sum() {
    let mut r = rng(5);
    for _ in 0..20 {
        let set = random_set(&mut r, 90, 30);
        let vals = random_disk(&mut r, set.len());
        let grid = GridSpec::default_for(90);
        let f = evaluate_on_grid(&seq(&set, &vals), &grid).unwrap();
        let scale: f64 = vals.iter().map(|v| v.norm()).sum();
        for (j, z) in f.iter().enumerate().step_by(13) {
            let d = eval_direct(&set, &vals, j as f64 / grid.points() as f64);
            assert!((z - d).norm() <= 1e-12 * scale.max(1.0));
        }
    }
}

#[test]
fn odd_p_quadrature_matches_direct_power_mean() {
    let set = FrequencySet::new(20, vec![1, 4, 9, 16, 20]).unwrap();
    let vals = vec![Complex64::new(1.0, 0.0); 5];
    let grid = GridSpec::default_for(20);
    let q = lp_norm(&seq(&set, &vals), 3.0, &grid).unwrap();
    let d = power_mean_direct(&set, &vals, 3.0, grid.points()).powf(1.0 / 3.0);
    assert!((q - d).abs() < 1e-12 * d);
}

#[test]
fn even_exact_matches_counting_oracle() {
    let mut r = rng(17);
    for _ in 0..30 {
        let set = random_set(&mut r, 150, 40);
        for k in 1..=4 {
            assert_eq!(dirichlet_even_moment(&set, k).unwrap(), additive_energy(&set, k));
        }
    }
}

#[test]
fn dirichlet_examples() {
    let g = |n| GridSpec::default_for(n);
    let full = FrequencySet::full(37);
    assert!((dirichlet_norm(&full, 2.0, &g(37)).unwrap() - 37f64.sqrt()).abs() < 1e-12);

    for (len, step) in [(5usize, 3usize), (12, 7), (30, 2)] {
        let ap = gen_ap(step * len, 1, step, len).unwrap();
        let expect = ((2 * len.pow(3) + len) as f64 / 3.0).powf(0.25);
        assert!((dirichlet_norm(&ap, 4.0, &g(step * len)).unwrap() - expect).abs() < 1e-10 * expect);
    }

    let sq = gen_squares(100);
    let count = additive_energy(&sq, 2);
    let expect = (count as f64).powf(0.25);
    assert!((dirichlet_norm(&sq, 4.0, &g(100)).unwrap() - expect).abs() < 1e-10 * expect);

    let c = CoefficientSeq::<f64>::indicator(FrequencySet::new(3, vec![1, 2, 3]).unwrap());
    assert!((lp_norm_even_exact(&c, 4.0).unwrap() - 19f64.powf(0.25)).abs() < 1e-14);
    let v = norm_auto(&c, 4.0, &g(3)).unwrap();
    assert_eq!(v.method, NormMethod::Exact);
}

#[test]
fn evaluation_is_bitwise_deterministic() {
    let mut r = rng(23);
    let set = random_set(&mut r, 500, 100);
    let vals = random_disk(&mut r, set.len());
    let c = seq(&set, &vals);
    let a = lp_norm(&c, 3.3, &GridSpec::default_for(500)).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| lp_norm(&c, 3.3, &GridSpec::default_for(500)).unwrap());
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn single_precision_tracks_double() {
    let mut r = rng(29);
    let set = random_set(&mut r, 64, 20);
    let vals = random_disk(&mut r, set.len());
    let c64 = seq(&set, &vals);
    let v32: Vec<num_complex::Complex32> = vals.iter().map(|z| num_complex::Complex32::new(z.re as f32, z.im as f32)).collect();
    let c32 = CoefficientSeq::new(set.clone(), v32, DomainTag::Unconstrained).unwrap();
    let g = GridSpec::default_for(64);
    let a = lp_norm(&c64, 3.0, &g).unwrap();
    let b = lp_norm(&c32, 3.0f32, &g).unwrap();
    assert!((a - b as f64).abs() < 1e-5 * a);
}
