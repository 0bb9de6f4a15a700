//! Extremal values of `‖Σ a_n e(nθ)‖_p` over coefficient balls.
//!
//! The objective `F(a) = ‖g‖_p^p`, `g = Σ a_n e(n·)`, is convex in `a` for
//! `p ≥ 1`, so replacing `a` by the maximizer of the linearization
//! `Re Σ a_n conj(b_n)` over the ball never decreases `F` (conditional-gradient
//! ascent with full steps). Here `b_n` is the `n`-th Fourier coefficient of
//! `g|g|^{p−2}`.

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::expsum::{dirichlet_norm, power_mean, CoefficientSeq, DomainTag, FrequencySet, GridEvaluator, GridSpec};
use crate::scalar::{CompensatedSum, Scalar};
use crate::setgen::Seed;

/// Below this modulus a linearization coefficient carries no phase information
/// and the previous phase is kept.
pub const PHASE_TIE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: Seed,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iter: 200,
            tol: 1e-9,
            seed: Seed::new(0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtremalResult<T> {
    pub best_norm: T,
    pub best_coeffs: CoefficientSeq<T>,
    /// `best_norm / ‖D_A‖_p` on the ℓ∞ ball, `best_norm` itself on the ℓ² ball.
    pub ratio: T,
    /// Iterations of the winning restart.
    pub iterations_used: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub converged: bool,
    /// Objective `‖g‖_p^p` after every iterate, one trace per restart.
    pub traces: Vec<Vec<T>>,
}

impl<T: Scalar> ExtremalResult<T> {
    /// `log(ratio) / log N`, the exponent in `ratio = N^γ`.
    pub fn gamma_estimate(&self, ambient: usize) -> f64 {
        if ambient < 2 {
            return 0.0;
        }
        self.ratio.as_f64().ln() / (ambient as f64).ln()
    }

    /// Largest single-step decrease over all traces (zero for a monotone run).
    pub fn worst_decrease(&self) -> T {
        let mut worst = T::zero();
        for tr in &self.traces {
            for w in tr.windows(2) {
                worst = worst.max(w[0] - w[1]);
            }
        }
        worst
    }
}

struct Linearizer<T: Scalar> {
    eval: GridEvaluator<T>,
    buf: Vec<Complex<T>>,
    p: T,
}

impl<T: Scalar> Linearizer<T> {
    fn new(points: usize, p: T) -> Self {
        Self {
            eval: GridEvaluator::new(points),
            buf: vec![Complex::new(T::zero(), T::zero()); points],
            p,
        }
    }

    /// Returns `‖g‖_p^p` and writes the coefficients of `g|g|^{p−2}` into `b`.
    fn step(&mut self, freqs: &[usize], a: &[Complex<T>], b: &mut [Complex<T>]) -> T {
        self.eval.synthesize(freqs, a, &mut self.buf);
        let obj = power_mean(&self.buf, self.p);
        let e = (self.p - T::of(2.0)) / T::of(2.0);
        for z in self.buf.iter_mut() {
            *z = *z * z.norm_sqr().powf(e);
        }
        self.eval.analyze(&mut self.buf, freqs, b);
        obj
    }

    fn objective(&mut self, freqs: &[usize], a: &[Complex<T>]) -> T {
        self.eval.synthesize(freqs, a, &mut self.buf);
        power_mean(&self.buf, self.p)
    }
}

fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if !(p >= T::of(2.0)) {
        return domain(format!("p = {p} < 2: |g|^(p-2) is singular at zeros of g"));
    }
    Ok(())
}

/// `b_n = M⁻¹ Σ_m g(θ_m)|g(θ_m)|^{p−2} e(−nθ_m)` for `n` in the support.
/// The directional derivative of `‖g‖_p^p` along `δa` is `p·Re Σ conj(δa_n) b_n`.
pub fn linearization_coeffs<T: Scalar>(coeffs: &CoefficientSeq<T>, p: T, grid: &GridSpec) -> Result<Vec<Complex<T>>> {
    check_exponent(p)?;
    grid.check(coeffs.support().ambient_size())?;
    let mut lin = Linearizer::new(grid.points(), p);
    let mut b = vec![Complex::new(T::zero(), T::zero()); coeffs.values().len()];
    lin.step(coeffs.support().elems(), coeffs.values(), &mut b);
    Ok(b)
}

/// Maximizer of `Re Σ a_n conj(b_n)` over the ball, given the previous point.
fn linear_maximizer<T: Scalar>(domain: DomainTag, b: &[Complex<T>], prev: &mut [Complex<T>]) {
    let tie = T::of(PHASE_TIE);
    match domain {
        DomainTag::L2Ball => {
            let norm = b
                .iter()
                .map(|z| z.norm_sqr())
                .collect::<CompensatedSum<T>>()
                .value()
                .sqrt();
            if norm >= tie {
                for (a, z) in prev.iter_mut().zip(b) {
                    *a = *z / norm;
                }
            }
        }
        _ => {
            for (a, z) in prev.iter_mut().zip(b) {
                let r = z.norm();
                if r >= tie {
                    *a = *z / r;
                }
            }
        }
    }
}

struct RestartOutcome<T> {
    objective: T,
    values: Vec<Complex<T>>,
    iterations: usize,
    converged: bool,
    trace: Vec<T>,
}

fn starting_point<T: Scalar>(k: usize, domain: DomainTag, restart: usize, seed: Seed) -> Vec<Complex<T>> {
    let scale = match domain {
        DomainTag::L2Ball => T::one() / T::of(k.max(1) as f64).sqrt(),
        _ => T::one(),
    };
    if restart == 0 {
        return vec![Complex::new(scale, T::zero()); k];
    }
    let mut rng = seed.child(restart as u64).rng();
    (0..k)
        .map(|_| {
            let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            Complex::from_polar(scale, T::of(phi))
        })
        .collect()
}

fn run_restart<T: Scalar>(
    freqs: &[usize],
    p: T,
    domain: DomainTag,
    points: usize,
    params: &SearchParams,
    restart: usize,
) -> RestartOutcome<T> {
    let k = freqs.len();
    let mut lin = Linearizer::new(points, p);
    let mut a = starting_point::<T>(k, domain, restart, params.seed);
    let mut b = vec![Complex::new(T::zero(), T::zero()); k];
    let mut obj = lin.step(freqs, &a, &mut b);
    let mut trace = vec![obj];
    let tol = T::of(params.tol);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..params.max_iter {
        iterations += 1;
        let mut next = a.clone();
        linear_maximizer(domain, &b, &mut next);
        let next_obj = lin.step(freqs, &next, &mut b);
        trace.push(next_obj);
        let change = (next_obj - obj) / obj.abs().max(T::min_positive_value());
        if next_obj >= obj {
            a = next;
            obj = next_obj;
        }
        if change.abs() < tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        objective: obj,
        values: a,
        iterations,
        converged,
        trace,
    }
}

/// Best `‖Σ a_n e(n·)‖_p` found by conditional-gradient ascent from several starts.
///
/// Restart 0 is the all-ones point (normalized on the ℓ² ball); the others use
/// random phases from `params.seed`. Restarts run in parallel and the winner is the
/// largest objective, ties going to the lowest restart index.
pub fn ascend<T: Scalar>(
    support: &FrequencySet,
    p: T,
    domain: DomainTag,
    grid: &GridSpec,
    params: &SearchParams,
) -> Result<ExtremalResult<T>> {
    check_exponent(p)?;
    if domain == DomainTag::Unconstrained {
        return domain_err();
    }
    if support.is_empty() {
        return Err(Error::Undefined("empty support".into()));
    }
    grid.check(support.ambient_size())?;
    let restarts = params.restarts.max(1);
    let freqs = support.elems();
    let outcomes: Vec<RestartOutcome<T>> = (0..restarts)
        .into_par_iter()
        .map(|r| run_restart(freqs, p, domain, grid.points(), params, r))
        .collect();

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.objective > outcomes[best].objective {
            best = i;
        }
    }
    let traces = outcomes.iter().map(|o| o.trace.clone()).collect();
    let win = &outcomes[best];
    let best_norm = win.objective.powf(p.recip());
    let best_coeffs = CoefficientSeq::new(support.clone(), win.values.clone(), domain)?;
    let ratio = match domain {
        DomainTag::LinfBall => best_norm / dirichlet_norm(support, p, grid)?,
        _ => best_norm,
    };
    Ok(ExtremalResult {
        best_norm,
        best_coeffs,
        ratio,
        iterations_used: win.iterations,
        restarts,
        best_restart: best,
        converged: win.converged,
        traces,
    })
}

fn domain_err<T>() -> Result<T> {
    domain("extremal search needs the ℓ∞ or ℓ² ball")
}

/// `sup_{|a_n| ≤ 1} ‖Σ a_n e(n·)‖_p / ‖Σ e(n·)‖_p` as found by [`ascend`].
pub fn majorant_ratio<T: Scalar>(set: &FrequencySet, p: T, grid: &GridSpec, params: &SearchParams) -> Result<T> {
    Ok(ascend(set, p, DomainTag::LinfBall, grid, params)?.ratio)
}

/// `K_p = sup_{|a|_2 ≤ 1} ‖Σ a_n e(n·)‖_p` as found by [`ascend`].
pub fn lambda_p_constant<T: Scalar>(set: &FrequencySet, p: T, grid: &GridSpec, params: &SearchParams) -> Result<T> {
    Ok(ascend(set, p, DomainTag::L2Ball, grid, params)?.best_norm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAlphabet {
    /// `a_n ∈ {±1}`
    Real,
    /// `a_n ∈ {±1, ±i}`
    Quarter,
}

impl PhaseAlphabet {
    fn size(self) -> usize {
        match self {
            Self::Real => 2,
            Self::Quarter => 4,
        }
    }

    fn symbol<T: Scalar>(self, digit: usize) -> Complex<T> {
        let (o, z) = (T::one(), T::zero());
        match (self, digit) {
            (_, 0) => Complex::new(o, z),
            (Self::Real, _) | (Self::Quarter, 2) => Complex::new(-o, z),
            (Self::Quarter, 1) => Complex::new(z, o),
            _ => Complex::new(z, -o),
        }
    }
}

/// Largest pattern count [`sign_pattern_search`] will enumerate.
pub const MAX_PATTERNS: usize = 1 << 22;

#[derive(Clone, Debug)]
pub struct PatternSearchResult<T> {
    pub best_norm: T,
    pub best_values: Vec<Complex<T>>,
    pub patterns: usize,
}

/// Exhaustive maximum of `‖Σ a_n e(n·)‖_p` over `a_n` drawn from `alphabet`, with
/// the first coefficient pinned to `1` (a global phase does not change `|g|`).
pub fn sign_pattern_search<T: Scalar>(
    support: &FrequencySet,
    p: T,
    grid: &GridSpec,
    alphabet: PhaseAlphabet,
) -> Result<PatternSearchResult<T>> {
    if !(p >= T::one()) {
        return domain(format!("p = {p} must be at least 1"));
    }
    if support.is_empty() {
        return Err(Error::Undefined("empty support".into()));
    }
    grid.check(support.ambient_size())?;
    let k = support.len();
    let base = alphabet.size();
    let patterns = (k - 1) as u32;
    let count = base
        .checked_pow(patterns)
        .filter(|&c| c <= MAX_PATTERNS)
        .ok_or_else(|| Error::Domain(format!("{base}^{patterns} patterns exceed the enumeration cap")))?;
    let freqs = support.elems();
    let decode = |mut idx: usize| -> Vec<Complex<T>> {
        let mut v = Vec::with_capacity(k);
        v.push(Complex::new(T::one(), T::zero()));
        for _ in 1..k {
            v.push(alphabet.symbol(idx % base));
            idx /= base;
        }
        v
    };
    let (obj, idx) = (0..count)
        .into_par_iter()
        .map_init(
            || Linearizer::new(grid.points(), p),
            |lin, idx| (lin.objective(freqs, &decode(idx)), idx),
        )
        .reduce(
            || (T::neg_infinity(), usize::MAX),
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            },
        );
    Ok(PatternSearchResult {
        best_norm: obj.powf(p.recip()),
        best_values: decode(idx),
        patterns: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::lp_norm;
    use num_complex::Complex64;

    fn set(n: usize, v: &[usize]) -> FrequencySet {
        FrequencySet::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn linearization_single_frequency() {
        let c = CoefficientSeq::<f64>::indicator(set(5, &[5]));
        for p in [2.0, 3.0, 5.5] {
            let b = linearization_coeffs(&c, p, &GridSpec::default_for(5)).unwrap();
            assert!((b[0] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn linearization_at_p2_is_identity() {
        let s = set(12, &[1, 3, 8, 12]);
        let vals = vec![
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.3, 0.9),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.7, 0.7),
        ];
        let c = CoefficientSeq::new(s, vals.clone(), DomainTag::LinfBall).unwrap();
        let b = linearization_coeffs(&c, 2.0, &GridSpec::default_for(12)).unwrap();
        for (x, y) in b.iter().zip(&vals) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(linearization_coeffs(&c, 1.5, &GridSpec::default_for(12)).is_err());
    }

    #[test]
    fn even_p_all_ones_is_a_fixed_point() {
        let s = set(30, &[2, 3, 7, 11, 19, 30]);
        let r = ascend(&s, 4.0_f64, DomainTag::LinfBall, &GridSpec::default_for(30), &SearchParams::default()).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-9);
        assert!(r.worst_decrease() <= 1e-12 * r.best_norm.powi(4));
        assert!(r.best_coeffs.values().iter().all(|a| (a.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn full_interval_l2_ball_gives_one() {
        let s = FrequencySet::full(16);
        let r = ascend(&s, 2.0_f64, DomainTag::L2Ball, &GridSpec::default_for(16), &SearchParams::default()).unwrap();
        assert!((r.best_norm - 1.0).abs() < 1e-12);
        assert!((r.best_coeffs.l2_norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_ratio_is_one() {
        for p in [2.0, 3.0, 4.5] {
            let r = majorant_ratio::<f64>(&set(9, &[9]), p, &GridSpec::default_for(9), &SearchParams::default()).unwrap();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = GridSpec::default_for(4);
        let p = SearchParams::default();
        assert!(ascend(&FrequencySet::full(4), 1.5, DomainTag::LinfBall, &g, &p).is_err());
        assert!(ascend(&FrequencySet::empty(4), 3.0, DomainTag::LinfBall, &g, &p).is_err());
        assert!(ascend(&FrequencySet::full(4), 3.0, DomainTag::Unconstrained, &g, &p).is_err());
    }

    #[test]
    fn pattern_search_counts_and_values() {
        let s = set(8, &[1, 2, 4]);
        let g = GridSpec::default_for(8);
        let r = sign_pattern_search::<f64>(&s, 4.0, &g, PhaseAlphabet::Real).unwrap();
        assert_eq!(r.patterns, 4);
        let q = sign_pattern_search::<f64>(&s, 3.0, &g, PhaseAlphabet::Quarter).unwrap();
        assert_eq!(q.patterns, 16);
        let c = CoefficientSeq::new(s, q.best_values.clone(), DomainTag::LinfBall).unwrap();
        assert!((lp_norm(&c, 3.0, &g).unwrap() - q.best_norm).abs() < 1e-13);
    }
}
