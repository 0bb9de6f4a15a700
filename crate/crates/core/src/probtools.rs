//! Checks of the large-deviation toolbox for centered Bernoulli selectors
//! `η = ξ − τ`, `P[ξ = 1] = τ`.

use num_complex::Complex64;
use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::expsum::{GridEvaluator, GridSpec};
use crate::scalar::{log_sum_exp, CompensatedSum};
use crate::setgen::{gen_perturbed_ap, Seed};

/// Trials per seeded chunk; chunk `c` draws from `seed.child(c)`.
const CHUNK: usize = 1024;

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("tau = {tau} outside (0, 1)"));
    }
    Ok(())
}

fn chunks(trials: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let n = trials.div_ceil(CHUNK);
    (0..n)
        .into_par_iter()
        .map(move |c| (c as u64, CHUNK.min(trials - c * CHUNK)))
}

/// `4·exp(−λ²/8)`.
pub fn ldt_bound(lambda: f64) -> f64 {
    4.0 * (-lambda * lambda / 8.0).exp()
}

/// Two-sided Gaussian tail `P[|Z| > λ]`, the large-`N` limit of the real case.
pub fn gaussian_tail(lambda: f64) -> f64 {
    erfc(lambda / std::f64::consts::SQRT_2)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationCheck {
    pub lambda_grid: Vec<f64>,
    pub exceed_freq: Vec<f64>,
    pub bound: Vec<f64>,
    /// `max_j λ|a_j| ≤ 4σ`
    pub condition_ok: Vec<bool>,
    pub sigma: f64,
    pub trials: usize,
}

impl DeviationCheck {
    /// Four binomial standard deviations at the bound.
    pub fn slack(&self, i: usize) -> f64 {
        let b = self.bound[i].min(1.0);
        4.0 * (b * (1.0 - b) / self.trials as f64).sqrt()
    }

    /// Indices where the condition holds but the frequency exceeds bound plus slack.
    pub fn violations(&self) -> Vec<usize> {
        (0..self.lambda_grid.len())
            .filter(|&i| self.condition_ok[i] && self.exceed_freq[i] > self.bound[i] + self.slack(i))
            .collect()
    }
}

/// Empirical `P[|Σ a_j η_j| > λσ]`, `σ² = τ(1−τ)Σ|a_j|²`, over `trials` draws.
pub fn ldt_empirical(a: &[Complex64], tau: f64, lambda_grid: &[f64], trials: usize, seed: Seed) -> Result<DeviationCheck> {
    check_tau(tau)?;
    if trials == 0 {
        return domain("no trials");
    }
    if lambda_grid.iter().any(|l| !(*l >= 0.0)) {
        return domain("lambda must be nonnegative");
    }
    let energy: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let sigma = (tau * (1.0 - tau) * energy).sqrt();
    let amax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let shift: Complex64 = a.iter().sum::<Complex64>() * tau;
    let coin = Bernoulli::new(tau).expect("tau checked");

    let counts = chunks(trials)
        .map(|(c, len)| {
            let mut rng = seed.child(c).rng();
            let mut hits = vec![0u64; lambda_grid.len()];
            for _ in 0..len {
                let mut s = -shift;
                for z in a {
                    if coin.sample(&mut rng) {
                        s += z;
                    }
                }
                let r = s.norm();
                for (h, l) in hits.iter_mut().zip(lambda_grid) {
                    if r > l * sigma {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; lambda_grid.len()],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
                x
            },
        );

    Ok(DeviationCheck {
        lambda_grid: lambda_grid.to_vec(),
        exceed_freq: counts.iter().map(|&h| h as f64 / trials as f64).collect(),
        bound: lambda_grid.iter().map(|&l| ldt_bound(l)).collect(),
        condition_ok: lambda_grid.iter().map(|&l| l * amax <= 4.0 * sigma).collect(),
        sigma,
        trials,
    })
}

/// `τe^{(1−τ)x} + (1−τ)e^{−τx} − 1`, with the first-order terms cancelled exactly.
pub fn mgf_lhs_m1(tau: f64, x: f64) -> f64 {
    tau * ((1.0 - tau) * x).exp_m1() + (1.0 - tau) * (-tau * x).exp_m1()
}

/// `exp(2τ(1−τ)x²) − 1`.
pub fn mgf_rhs_m1(tau: f64, x: f64) -> f64 {
    (2.0 * tau * (1.0 - tau) * x * x).exp_m1()
}

pub fn mgf_holds(tau: f64, x: f64) -> bool {
    mgf_lhs_m1(tau, x) <= mgf_rhs_m1(tau, x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MgfProbe {
    pub tau: f64,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl MgfProbe {
    fn at(tau: f64, x: f64) -> Self {
        Self {
            tau,
            x,
            lhs: 1.0 + mgf_lhs_m1(tau, x),
            rhs: 1.0 + mgf_rhs_m1(tau, x),
            holds: mgf_holds(tau, x),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MgfReport {
    pub points_checked: usize,
    /// Grid points where the inequality fails.
    pub grid_failures: Vec<MgfProbe>,
    /// One probe at `x = τ^{−1/2}` per `τ`.
    pub probes: Vec<MgfProbe>,
}

impl MgfReport {
    pub fn grid_ok(&self) -> bool {
        self.grid_failures.is_empty()
    }
}

pub fn mgf_inequality_check(tau_grid: &[f64], x_grid: &[f64]) -> Result<MgfReport> {
    for &t in tau_grid {
        check_tau(t)?;
    }
    let grid_failures = tau_grid
        .par_iter()
        .flat_map_iter(|&t| x_grid.iter().filter(move |&&x| !mgf_holds(t, x)).map(move |&x| MgfProbe::at(t, x)))
        .collect();
    let probes = tau_grid.iter().map(|&t| MgfProbe::at(t, t.powf(-0.5))).collect();
    Ok(MgfReport {
        points_checked: tau_grid.len() * x_grid.len(),
        grid_failures,
        probes,
    })
}

/// Largest `τ` at which the inequality fails at `x = τ^{−1/2}` (bisection on a sign change).
pub fn mgf_probe_threshold() -> f64 {
    let fails = |t: f64| !mgf_holds(t, t.powf(-0.5));
    let (mut lo, mut hi) = (1e-4, 0.5);
    debug_assert!(fails(lo) && !fails(hi));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if fails(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `{1, …, 30}` and `n ≤ 10⁴`.
pub const MAX_MOMENT_Q: u32 = 30;
pub const MAX_MOMENT_N: u64 = 10_000;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MomentCheck {
    pub exact: f64,
    pub bound: f64,
    pub log_exact: f64,
    pub log_bound: f64,
    pub ok: bool,
}

/// `E[(Σ_{j≤n} ξ_j)^q] = Σ_ℓ C(n,ℓ) ℓ^q τ^ℓ(1−τ)^{n−ℓ}` against `(q + eτn)^q`, in log space.
pub fn moment_bound_check(n: u64, tau: f64, q: u32) -> Result<MomentCheck> {
    check_tau(tau)?;
    if n == 0 || n > MAX_MOMENT_N {
        return domain(format!("n = {n} outside [1, {MAX_MOMENT_N}]"));
    }
    if q == 0 || q > MAX_MOMENT_Q {
        return domain(format!("q = {q} outside [1, {MAX_MOMENT_Q}]"));
    }
    let nf = n as f64;
    let ln_n1 = ln_gamma(nf + 1.0);
    let (lt, lu) = (tau.ln(), (-tau).ln_1p());
    let terms: Vec<f64> = (1..=n)
        .map(|l| {
            let lf = l as f64;
            ln_n1 - ln_gamma(lf + 1.0) - ln_gamma(nf - lf + 1.0) + q as f64 * lf.ln() + lf * lt + (nf - lf) * lu
        })
        .collect();
    let log_exact = log_sum_exp(&terms);
    let log_bound = q as f64 * (q as f64 + std::f64::consts::E * tau * nf).ln();
    Ok(MomentCheck {
        exact: log_exact.exp(),
        bound: log_bound.exp(),
        log_exact,
        log_bound,
        ok: log_exact <= log_bound,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SalemConditions {
    /// `sup_n 10|a_n|² log N ≤ σ²`
    pub coefficient_spread: bool,
    /// `10 ≤ τ(1−τ) N log N`
    pub density: bool,
}

impl SalemConditions {
    pub fn evaluate(n: usize, tau: f64, a: &[Complex64]) -> Self {
        let ln = (n as f64).ln();
        let energy: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let sigma2 = tau * (1.0 - tau) * energy;
        let amax2 = a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        Self {
            coefficient_spread: 10.0 * amax2 * ln <= sigma2,
            density: 10.0 <= tau * (1.0 - tau) * n as f64 * ln,
        }
    }

    pub fn hold(&self) -> bool {
        self.coefficient_spread && self.density
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SalemReport {
    pub conditions: SalemConditions,
    /// Set when the conditions fail and no trials were run.
    pub skipped: Option<String>,
    pub trials: usize,
    pub violations: usize,
    /// `20σ√log N`
    pub threshold: f64,
    /// Probability bound `4N⁻⁸`.
    pub bound: f64,
    /// Largest observed `sup|T| / (σ√log N)`.
    pub max_normalized: f64,
    pub grid_points: usize,
}

fn sup_on_grid(eval: &mut GridEvaluator<f64>, freqs: &[usize], vals: &[Complex64], buf: &mut [Complex64]) -> f64 {
    eval.synthesize(freqs, vals, buf);
    buf.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Counts trials with `sup_θ |Σ_{n≤N} a_n η_n e(nθ)| > 20σ√log N`, the sup taken
/// over a `4N`-point grid. `a[n−1]` is the coefficient of `e(nθ)`.
pub fn salem_zygmund_check(n: usize, tau: f64, a: &[Complex64], trials: usize, seed: Seed) -> Result<SalemReport> {
    check_tau(tau)?;
    if n < 2 || a.len() != n {
        return domain(format!("need N ≥ 2 and N coefficients (N = {n}, got {})", a.len()));
    }
    let conditions = SalemConditions::evaluate(n, tau, a);
    let ln = (n as f64).ln();
    let sigma = (tau * (1.0 - tau) * a.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    let grid = GridSpec::for_ambient(n, 4.0)?;
    let mut report = SalemReport {
        conditions,
        skipped: None,
        trials: 0,
        violations: 0,
        threshold: 20.0 * sigma * ln.sqrt(),
        bound: 4.0 * (n as f64).powi(-8),
        max_normalized: 0.0,
        grid_points: grid.points(),
    };
    if !conditions.hold() {
        let mut why = Vec::new();
        if !conditions.coefficient_spread {
            why.push("max 10|a_n|^2 log N exceeds sigma^2");
        }
        if !conditions.density {
            why.push("tau(1-tau) N log N < 10");
        }
        report.skipped = Some(why.join("; "));
        return Ok(report);
    }
    let freqs: Vec<usize> = (1..=n).collect();
    let coin = Bernoulli::new(tau).expect("tau checked");
    let sups: Vec<f64> = chunks(trials)
        .flat_map_iter(|(c, len)| {
            let mut rng = seed.child(c).rng();
            let mut eval = GridEvaluator::<f64>::new(grid.points());
            let mut buf = vec![Complex64::new(0.0, 0.0); grid.points()];
            let mut vals = vec![Complex64::new(0.0, 0.0); n];
            (0..len)
                .map(|_| {
                    for (v, z) in vals.iter_mut().zip(a) {
                        let eta = if coin.sample(&mut rng) { 1.0 - tau } else { -tau };
                        *v = z * eta;
                    }
                    sup_on_grid(&mut eval, &freqs, &vals, &mut buf)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    report.trials = trials;
    report.violations = sups.iter().filter(|&&s| s > report.threshold).count();
    report.max_normalized = sups.iter().fold(0.0, |m: f64, &s| m.max(s)) / (sigma * ln.sqrt());
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sz2Report {
    pub len: usize,
    pub s: usize,
    pub trials: usize,
    /// `sup|T| / (√log(s+L)·√L)` per trial; the constant is measured, not asserted.
    pub normalized_max: f64,
    pub normalized_mean: f64,
}

/// Mean-zero part of a perturbed progression: `T(θ) = Σ_i e((b+ai)θ)(e(ξ_iθ) − E e(ξ_iθ))`
/// with `ξ_i` uniform on `[−s, s]`. Returns the measured constant in
/// `‖T‖_∞ ≤ C √log(s+L) √L` over `trials` draws.
pub fn sz2_perturbed_ap(len: usize, s: usize, a: usize, trials: usize, seed: Seed) -> Result<Sz2Report> {
    if len == 0 || trials == 0 {
        return domain("need len ≥ 1 and trials ≥ 1");
    }
    let b = s + 1;
    let n = a * len;
    // validates the progression parameters
    gen_perturbed_ap(n, b, a, len, s, seed)?;
    let grid = GridSpec::for_ambient(n, 4.0)?;
    let m = grid.points();
    let freqs: Vec<usize> = (1..=n).collect();
    // The mean is the all-ones progression convolved with the uniform law on [−s, s].
    let mut mean = vec![Complex64::new(0.0, 0.0); n];
    let w = 1.0 / (2 * s + 1) as f64;
    for i in 0..len {
        let c = b + a * i;
        for k in c - s..=c + s {
            mean[k - 1] += w;
        }
    }
    let scale = ((s + len) as f64).ln().sqrt() * (len as f64).sqrt();
    let sups: Vec<f64> = chunks(trials)
        .flat_map_iter(|(c, cnt)| {
            let mut rng = seed.child(c).rng();
            let mut eval = GridEvaluator::<f64>::new(m);
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            (0..cnt)
                .map(|_| {
                    let mut vals: Vec<Complex64> = mean.iter().map(|z| -z).collect();
                    for i in 0..len {
                        let shift = rng.random_range(0..=2 * s);
                        vals[b + a * i + shift - s - 1] += 1.0;
                    }
                    sup_on_grid(&mut eval, &freqs, &vals, &mut buf) / scale
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(Sz2Report {
        len,
        s,
        trials,
        normalized_max: sups.iter().copied().fold(0.0, f64::max),
        normalized_mean: sups.iter().copied().collect::<CompensatedSum<f64>>().value() / trials as f64,
    })
}

/// `Var(η²) / (τ(1−τ)) = (1−2τ)²` exactly.
pub fn centered_square_ratio_exact(tau: f64) -> f64 {
    (1.0 - 2.0 * tau).powi(2)
}

/// Sample estimate of `E|η² − Eη²|² / (τ(1−τ))`.
pub fn centered_square_ratio_empirical(tau: f64, trials: usize, seed: Seed) -> Result<f64> {
    check_tau(tau)?;
    if trials < 2 {
        return domain("need at least two trials");
    }
    let coin = Bernoulli::new(tau).expect("tau checked");
    let mean_sq = tau * (1.0 - tau).powi(2) + (1.0 - tau) * tau * tau;
    let sum: f64 = chunks(trials)
        .map(|(c, len)| {
            let mut rng = seed.child(c).rng();
            let mut acc = CompensatedSum::default();
            for _ in 0..len {
                let eta: f64 = if coin.sample(&mut rng) { 1.0 - tau } else { -tau };
                acc.add((eta * eta - mean_sq).powi(2));
            }
            acc.value()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<CompensatedSum<f64>>()
        .value();
    Ok(sum / trials as f64 / (tau * (1.0 - tau)))
}
