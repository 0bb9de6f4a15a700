//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use majorant_lab::expsum::FrequencySet;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense coefficient vector indexed by frequency.
pub fn dense(set: &FrequencySet, vals: &[Complex64]) -> Vec<Complex64> {
    let mut d = vec![Complex64::new(0.0, 0.0); set.ambient_size() + 1];
    for (&n, v) in set.elems().iter().zip(vals) {
        d[n] = *v;
    }
    d
}

/// Schoolbook product of two coefficient vectors.
pub fn convolve(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `‖Σ a_n e(n·)‖_{2k}` as `(Σ |c_k(m)|²)^{1/2k}`, `c_k` the k-fold convolution.
pub fn even_norm_oracle(set: &FrequencySet, vals: &[Complex64], k: u32) -> f64 {
    let d = dense(set, vals);
    let mut c = d.clone();
    for _ in 1..k {
        c = convolve(&c, &d);
    }
    let s: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    s.powf(1.0 / (2.0 * k as f64))
}

/// Count of `(n₁,…,n_{2k}) ∈ A^{2k}` with `n₁+…+n_k = n_{k+1}+…+n_{2k}`.
pub fn additive_energy(set: &FrequencySet, k: u32) -> u128 {
    let mut counts = vec![1u128; 1];
    for _ in 0..k {
        let mut next = vec![0u128; counts.len() + set.ambient_size()];
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &n in set.elems() {
                next[s + n] += c;
            }
        }
        counts = next;
    }
    counts.iter().map(|c| c * c).sum()
}

/// Direct `f(θ) = Σ a_n e(nθ)`.
pub fn eval_direct(set: &FrequencySet, vals: &[Complex64], theta: f64) -> Complex64 {
    set.elems()
        .iter()
        .zip(vals)
        .map(|(&n, a)| a * Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 * theta))
        .sum()
}

/// `M⁻¹ Σ_m |f(m/M)|^p` by direct summation.
pub fn power_mean_direct(set: &FrequencySet, vals: &[Complex64], p: f64, m: usize) -> f64 {
    (0..m)
        .map(|j| eval_direct(set, vals, j as f64 / m as f64).norm().powf(p))
        .sum::<f64>()
        / m as f64
}

pub fn random_set(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> FrequencySet {
    let len = rng.random_range(1..=max_len.min(n));
    let mut all: Vec<usize> = (1..=n).collect();
    for i in 0..len {
        let j = rng.random_range(i..n);
        all.swap(i, j);
    }
    FrequencySet::from_unsorted(n, all[..len].to_vec()).unwrap()
}

pub fn random_disk(rng: &mut ChaCha8Rng, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|_| Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random::<f64>() * std::f64::consts::TAU))
        .collect()
}

pub fn random_phases(rng: &mut ChaCha8Rng, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
        .collect()
}

/// `E[X^q]`, `X ~ Bin(n, τ)`, as `Σ_k S(q,k) n^{(k)} τ^k` with Stirling numbers of the second kind.
pub fn binomial_moment_stirling(n: u64, tau: f64, q: u32) -> f64 {
    let q = q as usize;
    let mut s = vec![vec![0.0f64; q + 1]; q + 1];
    s[0][0] = 1.0;
    for i in 1..=q {
        for k in 1..=i {
            s[i][k] = k as f64 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    let mut total = 0.0;
    let mut falling = 1.0;
    let mut tk = 1.0;
    for (k, stirling) in s[q].iter().enumerate().skip(1) {
        falling *= n as f64 - (k as f64 - 1.0);
        tk *= tau;
        if falling == 0.0 {
            break;
        }
        total += stirling * falling * tk;
    }
    total
}

/// `E max(|g₁|, |g₂|)` for independent standard normals, by Simpson's rule on
/// `∫₀^∞ P[max > x] dx = ∫₀^∞ 1 − erf(x/√2)² dx`.
pub fn expected_max_two_half_normals() -> f64 {
    let f = |x: f64| {
        let e = erf_reference(x / std::f64::consts::SQRT_2);
        1.0 - e * e
    };
    let (a, b, n) = (0.0, 12.0, 20_000);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `erf` by its Maclaurin series (|x| ≤ 3) and continued fraction otherwise.
fn erf_reference(x: f64) -> f64 {
    if x.abs() <= 3.0 {
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) {
            k += 1.0;
            term *= -x * x / k;
            sum += term / (2.0 * k + 1.0);
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // erfc(x) = exp(−x²)/(x√π) · 1/(1 + 1/(2x²)/(1 + 2/(2x²)/(1 + …)))
        let z = 1.0 / (2.0 * x * x);
        let mut cf = 1.0;
        for k in (1..60).rev() {
            cf = 1.0 + k as f64 * z / cf;
        }
        1.0 - (-x * x).exp() / (x.abs() * std::f64::consts::PI.sqrt() * cf) * x.signum()
    }
}
