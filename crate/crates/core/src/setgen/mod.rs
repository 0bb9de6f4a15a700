//! Deterministic and random frequency sets, reproducible from explicit seeds.

mod io;
mod seed;

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::expsum::FrequencySet;

pub use io::{read_set, write_set, SetHeader};
pub use seed::Seed;

/// Default δ grid for the Bernoulli experiments (τ = N^{−δ}).
pub const DEFAULT_DELTAS: [f64; 3] = [0.25, 0.5, 0.75];

/// Set-generation law together with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelKind {
    /// Independent selectors with `P[n ∈ S] = τ`.
    Bernoulli { tau: f64 },
    /// Doubling-map selectors with `τ = 2^{−k}`.
    Doubling { k: u32 },
    /// `ξ_j = 1` iff `frac(j^s ω) < τ`.
    PowerSelector { exponent: u32, tau: f64 },
    /// `{j + ξ_j : j ∈ b + a·[0, len)}` with `ξ_j` uniform on `[−s, s]`.
    PerturbedAp { b: usize, a: usize, len: usize, s: usize },
    Squares,
    Ap { b: usize, a: usize, len: usize },
    Ap2d { b: usize, a1: usize, len1: usize, a2: usize, len2: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSetModel {
    pub ambient: usize,
    #[serde(flatten)]
    pub kind: ModelKind,
}

impl RandomSetModel {
    pub fn new(ambient: usize, kind: ModelKind) -> Result<Self> {
        let m = Self { ambient, kind };
        m.validate()?;
        Ok(m)
    }

    pub fn bernoulli(ambient: usize, tau: f64) -> Result<Self> {
        Self::new(ambient, ModelKind::Bernoulli { tau })
    }

    /// Bernoulli model with `τ = N^{−δ}`, `0 < δ < 1`.
    pub fn bernoulli_delta(ambient: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return domain(format!("delta = {delta} outside (0, 1)"));
        }
        Self::bernoulli(ambient, (ambient as f64).powf(-delta))
    }

    /// Perturbed progression with `b = s + 1` and `N = a·len`, which keeps every
    /// shifted element inside `[1, N]`.
    pub fn perturbed_ap_standard(len: usize, s: usize, a: usize) -> Result<Self> {
        Self::new(a * len, ModelKind::PerturbedAp { b: s + 1, a, len, s })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ambient;
        if n == 0 {
            return domain("ambient size must be positive");
        }
        match self.kind {
            ModelKind::Bernoulli { tau } | ModelKind::PowerSelector { tau, .. } => {
                if !(tau > 0.0 && tau < 1.0) {
                    return domain(format!("tau = {tau} outside (0, 1)"));
                }
                if let ModelKind::PowerSelector { exponent, .. } = self.kind {
                    if exponent == 0 {
                        return domain("selector exponent must be at least 1");
                    }
                }
            }
            ModelKind::Doubling { k } => {
                if k == 0 || k > 63 {
                    return domain(format!("doubling depth k = {k} outside [1, 63]"));
                }
            }
            ModelKind::PerturbedAp { b, a, len, s } => check_perturbed(n, b, a, len, s)?,
            ModelKind::Squares => {}
            ModelKind::Ap { b, a, len } => check_ap(n, b, a, len)?,
            ModelKind::Ap2d {
                b,
                a1,
                len1,
                a2,
                len2,
            } => check_ap2d(n, b, a1, len1, a2, len2)?,
        }
        Ok(())
    }

    /// Compact identifier without whitespace, used in set-file headers.
    pub fn tag(&self) -> String {
        match &self.kind {
            ModelKind::Bernoulli { tau } => format!("bernoulli,tau={tau}"),
            ModelKind::Doubling { k } => format!("doubling,k={k}"),
            ModelKind::PowerSelector { exponent, tau } => {
                format!("power,s={exponent},tau={tau}")
            }
            ModelKind::PerturbedAp { b, a, len, s } => {
                format!("perturbed_ap,b={b},a={a},len={len},s={s}")
            }
            ModelKind::Squares => "squares".into(),
            ModelKind::Ap { b, a, len } => format!("ap,b={b},a={a},len={len}"),
            ModelKind::Ap2d {
                b,
                a1,
                len1,
                a2,
                len2,
            } => format!("ap2d,b={b},a1={a1},len1={len1},a2={a2},len2={len2}"),
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(
            self.kind,
            ModelKind::Squares | ModelKind::Ap { .. } | ModelKind::Ap2d { .. }
        )
    }

    /// Draws one set; deterministic models ignore the seed.
    pub fn sample(&self, seed: Seed) -> Result<FrequencySet> {
        let n = self.ambient;
        match self.kind {
            ModelKind::Bernoulli { tau } => gen_bernoulli(n, tau, seed),
            ModelKind::Doubling { k } => gen_doubling(n, k, seed),
            ModelKind::PowerSelector { exponent, tau } => gen_power_selector(n, exponent, tau, seed),
            ModelKind::PerturbedAp { b, a, len, s } => gen_perturbed_ap(n, b, a, len, s, seed),
            ModelKind::Squares => Ok(gen_squares(n)),
            ModelKind::Ap { b, a, len } => gen_ap(n, b, a, len),
            ModelKind::Ap2d {
                b,
                a1,
                len1,
                a2,
                len2,
            } => gen_ap2d(n, b, a1, len1, a2, len2),
        }
    }
}

fn bernoulli_with(n: usize, tau: f64, seed: Seed) -> Result<FrequencySet> {
    let dist = Bernoulli::new(tau).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = seed.rng();
    let elems = (1..=n).filter(|_| dist.sample(&mut rng)).collect();
    FrequencySet::new(n, elems)
}

/// Each `n ∈ [1, N]` kept independently with probability `τ ∈ (0, 1)`.
pub fn gen_bernoulli(n: usize, tau: f64, seed: Seed) -> Result<FrequencySet> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("tau = {tau} outside (0, 1)"));
    }
    bernoulli_with(n, tau, seed)
}

/// As [`gen_bernoulli`] with `τ` clamped into `[0, 1]`; `0` gives the empty set and
/// `1` the full interval.
pub fn gen_bernoulli_clamped(n: usize, tau: f64, seed: Seed) -> Result<FrequencySet> {
    if tau.is_nan() {
        return domain("tau is NaN");
    }
    bernoulli_with(n, tau.clamp(0.0, 1.0), seed)
}

/// Doubling-map selectors `ξ_j = 1` iff `frac(2^j ω) < 2^{−k}`. The point `ω` is a
/// uniformly random binary expansion of `N + k + 64` digits.
pub fn gen_doubling(n: usize, k: u32, seed: Seed) -> Result<FrequencySet> {
    if k == 0 {
        return domain("doubling depth k must be at least 1");
    }
    let len = n + k as usize + 64;
    let mut rng = seed.rng();
    let mut digits = Vec::with_capacity(len);
    while digits.len() < len {
        let word: u64 = rng.random();
        digits.extend((0..64).map(|i| (word >> (63 - i)) & 1 == 1));
    }
    digits.truncate(len);
    doubling_from_digits(n, k, &digits)
}

/// Selector set for a given expansion `ω = 0.d_1 d_2 d_3 …₂` (`digits[0] = d_1`):
/// `j ∈ S` iff `d_{j+1} = … = d_{j+k} = 0`. Missing trailing digits count as zero.
pub fn doubling_from_digits(n: usize, k: u32, digits: &[bool]) -> Result<FrequencySet> {
    let k = k as usize;
    let len = n + k + 1;
    // zero_run[i]: number of consecutive zero digits starting at digits[i]
    let mut zero_run = vec![0usize; len + 1];
    zero_run[len] = usize::MAX / 2;
    for i in (0..len).rev() {
        let d = digits.get(i).copied().unwrap_or(false);
        zero_run[i] = if d { 0 } else { zero_run[i + 1] + 1 };
    }
    let elems = (1..=n).filter(|&j| zero_run[j] >= k).collect();
    FrequencySet::new(n, elems)
}

/// Correlated selectors `ξ_j = 1` iff `frac(j^s ω) < τ` with `ω` drawn at 128-bit
/// fixed-point precision.
pub fn gen_power_selector(n: usize, exponent: u32, tau: f64, seed: Seed) -> Result<FrequencySet> {
    let mut rng = seed.rng();
    let hi: u64 = rng.random();
    let lo: u64 = rng.random();
    power_selector_from_omega(n, exponent, tau, ((hi as u128) << 64) | lo as u128)
}

/// Power selectors for `ω = omega / 2^128`. Products wrap mod `2^128`, which is
/// exactly taking the fractional part.
pub fn power_selector_from_omega(n: usize, exponent: u32, tau: f64, omega: u128) -> Result<FrequencySet> {
    if exponent == 0 {
        return domain("selector exponent must be at least 1");
    }
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("tau = {tau} outside (0, 1)"));
    }
    let threshold = ((tau * 2f64.powi(64)) as u64 as u128) << 64;
    let elems = (1..=n)
        .filter(|&j| (j as u128).wrapping_pow(exponent).wrapping_mul(omega) < threshold)
        .collect();
    FrequencySet::new(n, elems)
}

fn check_perturbed(n: usize, b: usize, a: usize, len: usize, s: usize) -> Result<()> {
    if !(0 < b && b < a) {
        return domain(format!("need 0 < b < a, got b = {b}, a = {a}"));
    }
    if s == 0 {
        return domain("perturbation radius s must be at least 1");
    }
    if 2 * s + 1 > a {
        return domain(format!(
            "2s + 1 = {} exceeds the step a = {a}; the intervals [j − s, j + s] would overlap",
            2 * s + 1
        ));
    }
    if len == 0 || len > n / a {
        return domain(format!("length {len} outside [1, ⌊N/a⌋ = {}]", n / a));
    }
    if b <= s || b + a * (len - 1) + s > n {
        return domain(format!(
            "shifted elements leave [1, {n}] (b = {b}, s = {s}, last = {})",
            b + a * (len - 1)
        ));
    }
    Ok(())
}

/// Perturbed progression: each `j = b + a·i` moved by an independent uniform
/// integer in `[−s, s]`. The result always has exactly `len` elements.
pub fn gen_perturbed_ap(n: usize, b: usize, a: usize, len: usize, s: usize, seed: Seed) -> Result<FrequencySet> {
    check_perturbed(n, b, a, len, s)?;
    let mut rng = seed.rng();
    let base: Vec<usize> = (0..len).map(|i| b + a * i).collect();
    let shifts: Vec<i64> = (0..len)
        .map(|_| rng.random_range(-(s as i64)..=s as i64))
        .collect();
    apply_shifts(n, &base, &shifts)
}

/// `{j + ξ_j}` for an explicit progression and shift vector.
pub fn apply_shifts(n: usize, base: &[usize], shifts: &[i64]) -> Result<FrequencySet> {
    if base.len() != shifts.len() {
        return domain("one shift per progression element required");
    }
    let elems: Vec<usize> = base
        .iter()
        .zip(shifts)
        .map(|(&j, &d)| j as i64 + d)
        .map(|v| usize::try_from(v).map_err(|_| Error::InvalidSet(format!("shifted element {v} < 1"))))
        .collect::<Result<_>>()?;
    let set = FrequencySet::from_unsorted(n, elems)?;
    if set.len() != base.len() {
        return Err(Error::InvalidSet("shifted elements collide".into()));
    }
    Ok(set)
}

/// Exact `E A_ℓ` for the perturbed progression: the `i = 0` block contributes
/// `len·[ℓ = 0]`, every other multiple `i` of `a` contributes
/// `(len − |i|/a)₊ · P[ξ − ξ' = ℓ − i]` with the triangular law
/// `P[ξ − ξ' = d] = (2s + 1 − |d|)₊ / (2s + 1)²`.
pub fn perturbed_ap_mean_pair_count(len: usize, a: usize, s: usize, lag: i64) -> f64 {
    let w = (2 * s + 1) as f64;
    let tri = |d: i64| ((w - d.unsigned_abs() as f64).max(0.0)) / (w * w);
    let a_i = a as i64;
    let reach = 2 * s as i64;
    let lo = (lag - reach).div_euclid(a_i);
    let hi = (lag + reach).div_euclid(a_i) + 1;
    let mut total = if lag == 0 { len as f64 } else { 0.0 };
    for q in lo..=hi {
        if q == 0 {
            continue;
        }
        let pairs = (len as f64 - q.unsigned_abs() as f64).max(0.0);
        total += pairs * tri(lag - q * a_i);
    }
    total
}

/// The Fejér-kernel form `(L − |i|/a)₊ · 2/(2s+1) · (1 − |ℓ − i|/s)₊` with `i` the
/// multiple of `a` nearest to `ℓ`, `i ≠ 0`. It has the right mass but half the
/// width and twice the peak of [`perturbed_ap_mean_pair_count`].
pub fn perturbed_ap_fejer_form(len: usize, a: usize, s: usize, lag: i64) -> f64 {
    let a_i = a as i64;
    let i = (lag as f64 / a as f64).round() as i64 * a_i;
    if i == 0 {
        return 0.0;
    }
    let pairs = (len as f64 - (i / a_i).unsigned_abs() as f64).max(0.0);
    let d = (lag - i).unsigned_abs() as f64;
    pairs * 2.0 / (2 * s + 1) as f64 * (1.0 - d / s as f64).max(0.0)
}

/// `{n² : 1 ≤ n, n² ≤ N}`.
pub fn gen_squares(n: usize) -> FrequencySet {
    let elems = (1..).map(|k: usize| k * k).take_while(|&sq| sq <= n).collect();
    FrequencySet::new(n, elems).expect("squares are increasing and in range")
}

fn check_ap(n: usize, b: usize, a: usize, len: usize) -> Result<()> {
    if b == 0 || a == 0 {
        return domain("progression needs b ≥ 1 and a ≥ 1");
    }
    if len > 0 && b + a * (len - 1) > n {
        return domain(format!("progression end {} exceeds N = {n}", b + a * (len - 1)));
    }
    Ok(())
}

/// `{b + a·j : 0 ≤ j < len}`.
pub fn gen_ap(n: usize, b: usize, a: usize, len: usize) -> Result<FrequencySet> {
    check_ap(n, b, a, len)?;
    FrequencySet::new(n, (0..len).map(|j| b + a * j).collect())
}

fn check_ap2d(n: usize, b: usize, a1: usize, len1: usize, a2: usize, len2: usize) -> Result<()> {
    if b == 0 || a1 == 0 || len1 == 0 || len2 == 0 {
        return domain("two-dimensional progression needs b, a1, len1, len2 ≥ 1");
    }
    if a1 * len1 >= a2 {
        return domain(format!("need a1·len1 < a2, got {} ≥ {a2}", a1 * len1));
    }
    let last = b + a1 * (len1 - 1) + a2 * (len2 - 1);
    if last > n {
        return domain(format!("progression end {last} exceeds N = {n}"));
    }
    Ok(())
}

/// `{b + j₁a₁ + j₂a₂ : 0 ≤ j₁ < len1, 0 ≤ j₂ < len2}` with `a₁·len1 < a₂`.
pub fn gen_ap2d(n: usize, b: usize, a1: usize, len1: usize, a2: usize, len2: usize) -> Result<FrequencySet> {
    check_ap2d(n, b, a1, len1, a2, len2)?;
    let elems = (0..len2)
        .flat_map(|j2| (0..len1).map(move |j1| b + j1 * a1 + j2 * a2))
        .collect();
    FrequencySet::new(n, elems)
}
