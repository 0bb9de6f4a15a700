//! Monte Carlo sweeps over set size with log-log exponent fits.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::expsum::{
    as_even_exponent, dirichlet_even_moment, lp_norm_adaptive, norm_auto, CoefficientSeq, DomainTag, FrequencySet,
    GridSpec, DEFAULT_OVERSAMPLE,
};
use crate::extremal::{ascend, SearchParams};
use crate::scalar::CompensatedSum;
use crate::setgen::{ModelKind, RandomSetModel, Seed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `‖D_A‖_p^p`
    DirichletNormP,
    /// `sup_{|a_n|≤1} ‖Σ a_n e(n·)‖_p / ‖D_A‖_p`
    MajorantRatio,
    /// `sup_{|a|_2≤1} ‖Σ a_n e(n·)‖_p`
    KpConstant,
    /// see [`star_ratio`]
    StarRatio,
}

impl Statistic {
    /// Whether an empty set leaves the statistic undefined.
    fn needs_nonempty(self) -> bool {
        !matches!(self, Self::DirichletNormP)
    }
}

/// A set law indexed by one size parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// size `N`, `τ = N^{−δ}`
    Bernoulli { delta: f64 },
    /// size `N`, fixed `τ`
    BernoulliTau { tau: f64 },
    /// size `N`, `τ = N^{−1+2/p}`
    BernoulliCritical,
    /// size `N`
    Doubling { k: u32 },
    /// size `N`
    PowerSelector { exponent: u32, tau: f64 },
    /// size `L`; `s = ⌈L^β⌉`, `a = a_factor·s`, `b = s + 1`, `N = aL`
    PerturbedAp { beta: f64, a_factor: usize },
    /// size `L`; `{1, 1 + a, …}` inside `N = aL`
    Ap { step: usize },
    /// size `K`; `{n² : n ≤ K}` inside `N = K²`
    Squares,
    /// size `N`; all of `[1, N]`
    Full,
}

/// `⌈x⌉`, treating values within `1e−9` of an integer as that integer.
fn robust_ceil(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

impl Family {
    pub fn model_at(&self, size: usize, p: f64) -> Result<RandomSetModel> {
        if size == 0 {
            return domain("size must be positive");
        }
        match *self {
            Family::Bernoulli { delta } => RandomSetModel::bernoulli_delta(size, delta),
            Family::BernoulliTau { tau } => RandomSetModel::bernoulli(size, tau),
            Family::BernoulliCritical => {
                if !(p > 2.0) {
                    return domain("critical density needs p > 2");
                }
                RandomSetModel::bernoulli(size, (size as f64).powf(-1.0 + 2.0 / p))
            }
            Family::Doubling { k } => RandomSetModel::new(size, ModelKind::Doubling { k }),
            Family::PowerSelector { exponent, tau } => {
                RandomSetModel::new(size, ModelKind::PowerSelector { exponent, tau })
            }
            Family::PerturbedAp { beta, a_factor } => {
                let s = robust_ceil((size as f64).powf(beta)).max(1);
                RandomSetModel::perturbed_ap_standard(size, s, a_factor * s)
            }
            Family::Ap { step } => RandomSetModel::new(
                step * size,
                ModelKind::Ap {
                    b: 1,
                    a: step,
                    len: size,
                },
            ),
            Family::Squares => RandomSetModel::new(size * size, ModelKind::Squares),
            Family::Full => RandomSetModel::new(
                size,
                ModelKind::Ap {
                    b: 1,
                    a: 1,
                    len: size,
                },
            ),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Family::Bernoulli { delta } => format!("bernoulli,delta={delta}"),
            Family::BernoulliTau { tau } => format!("bernoulli,tau={tau}"),
            Family::BernoulliCritical => "bernoulli,critical".into(),
            Family::Doubling { k } => format!("doubling,k={k}"),
            Family::PowerSelector { exponent, tau } => format!("power_selector,exponent={exponent},tau={tau}"),
            Family::PerturbedAp { beta, a_factor } => format!("perturbed_ap,beta={beta},a_factor={a_factor}"),
            Family::Ap { step } => format!("ap,step={step}"),
            Family::Squares => "squares".into(),
            Family::Full => "full".into(),
        }
    }
}

/// Exponent of a two-term power law `c₁X^{e₁} + c₂X^{e₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub exponent: f64,
    pub terms: (f64, f64),
    /// Parameter value where the two terms have equal exponent.
    pub crossover: f64,
}

impl Prediction {
    fn two(e1: f64, e2: f64, crossover: f64) -> Self {
        Self {
            exponent: e1.max(e2),
            terms: (e1, e2),
            crossover,
        }
    }

    pub fn gap(&self) -> f64 {
        (self.terms.0 - self.terms.1).abs()
    }
}

/// Predicted growth exponent of the statistic in the family's size parameter,
/// where a law is known.
pub fn predicted_exponent(family: &Family, statistic: Statistic, p: f64) -> Option<Prediction> {
    match statistic {
        Statistic::MajorantRatio if as_even_exponent(p).is_some() => return Some(Prediction::two(0.0, 0.0, f64::NAN)),
        Statistic::DirichletNormP => {}
        _ => return None,
    }
    match *family {
        Family::Bernoulli { delta } => Some(Prediction::two(p - 1.0 - p * delta, p / 2.0 * (1.0 - delta), 1.0 - 2.0 / p)),
        Family::PerturbedAp { beta, .. } => Some(Prediction::two(p / 2.0, p - 1.0 - beta, p / 2.0 - 1.0)),
        Family::Ap { .. } | Family::Full => Some(Prediction::two(p - 1.0, p - 1.0, f64::NAN)),
        Family::Squares => Some(Prediction::two(p / 2.0, p - 2.0, 4.0)),
        _ => None,
    }
}

/// Exponent gap below which the single-power fit is replaced by the two-term fit.
pub const CROSSOVER_GAP: f64 = 0.25;
/// Largest excluded fraction before a size is flagged invalid.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub p: f64,
    pub trials: usize,
    pub seed: Seed,
    pub statistic: Statistic,
    #[serde(default = "default_oversample")]
    pub oversample: f64,
    #[serde(default)]
    pub search: Option<SearchParams>,
    /// Smallest size entering the exponent fit.
    #[serde(default = "default_fit_min")]
    pub fit_min_size: usize,
}

fn default_oversample() -> f64 {
    DEFAULT_OVERSAMPLE
}

fn default_fit_min() -> usize {
    DEFAULT_FIT_MIN_SIZE
}

pub const DEFAULT_FIT_MIN_SIZE: usize = 1 << 8;
pub const MIN_TRIALS: usize = 8;

impl ExperimentConfig {
    pub fn new(family: Family, sizes: Vec<usize>, p: f64, trials: usize, seed: Seed, statistic: Statistic) -> Self {
        Self {
            family,
            sizes,
            p,
            trials,
            seed,
            statistic,
            oversample: DEFAULT_OVERSAMPLE,
            search: None,
            fit_min_size: DEFAULT_FIT_MIN_SIZE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return domain("sizes must be nonempty and strictly increasing");
        }
        if self.trials < MIN_TRIALS {
            return domain(format!("trials = {} below {MIN_TRIALS}", self.trials));
        }
        if !(self.p >= 1.0) {
            return domain(format!("p = {} below 1", self.p));
        }
        if matches!(self.statistic, Statistic::MajorantRatio | Statistic::KpConstant) && self.p < 2.0 {
            return domain("extremal statistics need p ≥ 2");
        }
        if self.statistic == Statistic::StarRatio && !(self.p > 2.0) {
            return domain("star ratio needs p > 2");
        }
        for &n in &self.sizes {
            self.family.model_at(n, self.p)?;
        }
        GridSpec::for_ambient(1, self.oversample)?;
        Ok(())
    }
}

/// `‖D_A‖₂ · ‖D_A‖_{2(p−1)}^{p−1} / ‖D_A‖_p^p`. Even exponents use exact
/// counting, others the refining quadrature.
pub fn star_ratio(set: &FrequencySet, p: f64, grid: &GridSpec) -> Result<f64> {
    if !(p > 2.0) {
        return domain(format!("p = {p} must exceed 2"));
    }
    if set.is_empty() {
        return Err(Error::Undefined("empty set".into()));
    }
    let ind = CoefficientSeq::<f64>::indicator(set.clone());
    let l2 = (set.len() as f64).sqrt();
    let hi = norm_auto(&ind, 2.0 * (p - 1.0), grid)?.value;
    let lp = norm_auto(&ind, p, grid)?.value;
    Ok(l2 * hi.powf(p - 1.0) / lp.powf(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// `C·(N/|A|)^{1/p}`
    pub hausdorff_young_ratio_bound: f64,
    /// `(|A|^p/N)^{1/p}`
    pub trivial_lower_bound: f64,
}

pub fn baseline_bounds(set: &FrequencySet, p: f64, c: f64) -> Result<Baselines> {
    if !(p >= 1.0) {
        return domain(format!("p = {p} below 1"));
    }
    let n = set.ambient_size() as f64;
    let k = set.len() as f64;
    Ok(Baselines {
        hausdorff_young_ratio_bound: c * (n / k).powf(p.recip()),
        trivial_lower_bound: k * n.powf(-p.recip()),
    })
}

/// `‖D_A‖_p^p`, exactly for even `p`.
pub fn dirichlet_power(set: &FrequencySet, p: f64, grid: &GridSpec) -> Result<f64> {
    if let Some(k) = as_even_exponent(p) {
        if let Ok(m) = dirichlet_even_moment(set, k) {
            return Ok(m as f64);
        }
    }
    let ind = CoefficientSeq::<f64>::indicator(set.clone());
    Ok(norm_auto(&ind, p, grid)?.value.powf(p))
}

fn evaluate(config: &ExperimentConfig, set: &FrequencySet, seed: Seed) -> Result<f64> {
    let grid = GridSpec::for_ambient(set.ambient_size(), config.oversample)?;
    let search = || {
        let mut s = config.search.unwrap_or_default();
        s.seed = seed;
        s
    };
    match config.statistic {
        Statistic::DirichletNormP => dirichlet_power(set, config.p, &grid),
        Statistic::MajorantRatio => Ok(ascend(set, config.p, DomainTag::LinfBall, &grid, &search())?.ratio),
        Statistic::KpConstant => Ok(ascend(set, config.p, DomainTag::L2Ball, &grid, &search())?.best_norm),
        Statistic::StarRatio => star_ratio(set, config.p, &grid),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub size: usize,
    pub ambient: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub trials: usize,
    pub excluded: usize,
    pub valid: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
}

/// Ordinary least squares of `ln y` against `ln x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Some(LogLogFit {
        slope,
        intercept,
        residual_rms: (rss / n).sqrt(),
        points: pts.len(),
    })
}

/// `y ≈ c₁x^{e₁} + c₂x^{e₂}` with fixed exponents, least squares in relative error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTermFit {
    pub exponents: (f64, f64),
    pub coefficients: (f64, f64),
    pub positive: bool,
}

pub fn fit_two_term(xs: &[f64], ys: &[f64], e: (f64, f64)) -> Option<TwoTermFit> {
    // normal equations for rows (x^e1/y, x^e2/y) against target 1
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0) {
            continue;
        }
        let u = x.powf(e.0) / y;
        let v = x.powf(e.1) / y;
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u;
        b2 += v;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > 1e-12 * a11 * a22) {
        return None;
    }
    let c1 = (b1 * a22 - b2 * a12) / det;
    let c2 = (a11 * b2 - a12 * b1) / det;
    Some(TwoTermFit {
        exponents: e,
        coefficients: (c1, c2),
        positive: c1 > 0.0 && c2 > 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub config: ExperimentConfig,
    pub rows: Vec<SizeRow>,
    pub fit: Option<LogLogFit>,
    pub prediction: Option<Prediction>,
    /// Present when the two predicted terms are within [`CROSSOVER_GAP`].
    pub two_term: Option<TwoTermFit>,
}

impl ScalingReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn predicted(&self) -> Option<f64> {
        self.prediction.map(|p| p.exponent)
    }

    pub fn all_sizes_valid(&self) -> bool {
        self.rows.iter().all(|r| r.valid)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "size,stat_mean,stat_std,trials,excluded")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.size, r.mean, r.std, r.trials, r.excluded)?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.fit.map(|f| f.slope),
            "intercept": self.fit.map(|f| f.intercept),
            "residual_rms": self.fit.map(|f| f.residual_rms),
            "fit_points": self.fit.map(|f| f.points),
            "predicted_exponent": self.predicted(),
            "prediction": self.prediction,
            "two_term": self.two_term,
            "all_sizes_valid": self.all_sizes_valid(),
            "seed": self.config.seed.to_string(),
            "config": self.config,
            "rows": self.rows,
        })
    }
}

/// Seed of trial `t` at size index `i`.
pub fn trial_seed(base: Seed, size_index: usize, trial: usize) -> Seed {
    base.child(size_index as u64).child(trial as u64)
}

enum Draw {
    Value(f64),
    Excluded,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ScalingReport> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.sizes.len())
        .flat_map(|i| (0..config.trials).map(move |t| (i, t)))
        .collect();
    let draws: Vec<Result<Draw>> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let seed = trial_seed(config.seed, i, t);
            let model = config.family.model_at(config.sizes[i], config.p)?;
            let set = model.sample(seed.child(0))?;
            if set.is_empty() && config.statistic.needs_nonempty() {
                return Ok(Draw::Excluded);
            }
            Ok(Draw::Value(evaluate(config, &set, seed.child(1))?))
        })
        .collect();

    let mut rows = Vec::with_capacity(config.sizes.len());
    for (i, &size) in config.sizes.iter().enumerate() {
        let mut vals = Vec::with_capacity(config.trials);
        let mut excluded = 0;
        for d in &draws[i * config.trials..(i + 1) * config.trials] {
            match d {
                Ok(Draw::Value(v)) => vals.push(*v),
                Ok(Draw::Excluded) => excluded += 1,
                Err(e) => return Err(Error::Domain(format!("size {size}: {e}"))),
            }
        }
        let n = vals.len();
        let mean = if n > 0 {
            vals.iter().copied().collect::<CompensatedSum<f64>>().value() / n as f64
        } else {
            f64::NAN
        };
        let std = if n > 1 {
            (vals.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum<f64>>().value() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(SizeRow {
            size,
            ambient: config.family.model_at(size, config.p)?.ambient,
            mean,
            std,
            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            trials: n,
            excluded,
            valid: n > 0 && (excluded as f64) <= MAX_EXCLUDED_FRACTION * config.trials as f64,
        });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.valid && r.size >= config.fit_min_size)
        .map(|r| (r.size as f64, r.mean))
        .unzip();
    let prediction = predicted_exponent(&config.family, config.statistic, config.p);
    let two_term = prediction
        .filter(|p| p.gap() < CROSSOVER_GAP && p.gap() > 0.0)
        .and_then(|p| fit_two_term(&xs, &ys, p.terms));
    Ok(ScalingReport {
        config: config.clone(),
        fit: fit_loglog(&xs, &ys),
        prediction,
        two_term,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinkRow {
    pub p: f64,
    /// `‖Σ_{n≤K} e(n²θ)‖_p` per `K`.
    pub norms: Vec<f64>,
    /// Fitted exponent of the norm in the number of terms `K`.
    pub slope_terms: Option<f64>,
    /// Same in the ambient size `N = K²`, i.e. half of `slope_terms`.
    pub slope_ambient: Option<f64>,
    /// `1/2` for `p ≤ 4`, `1 − 2/p` for `p ≥ 4`, in `K`.
    pub predicted_terms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinkReport {
    pub terms: Vec<usize>,
    pub rows: Vec<KinkRow>,
    /// Mean over trials of `‖Σ a_n e(n²θ)‖₄ / |a|₂` per `K`.
    pub dual4_ratios: Vec<f64>,
    /// Exponent of `dual4_ratios` in `N = K²`.
    pub dual4_slope_ambient: Option<f64>,
}

pub const MAX_SQUARE_TERMS: usize = 512;
/// Ladder tolerance for the squares norms at non-even `p`.
const KINK_TOL: f64 = 1e-7;

fn squares_norm(k: usize, p: f64) -> Result<f64> {
    let set = crate::setgen::gen_squares(k * k);
    if let Some(e) = as_even_exponent(p) {
        if let Ok(m) = dirichlet_even_moment(&set, e) {
            return Ok((m as f64).powf(p.recip()));
        }
    }
    let grid = GridSpec::default_for(k * k);
    Ok(lp_norm_adaptive(&CoefficientSeq::<f64>::indicator(set), p, &grid, KINK_TOL)?.value)
}

fn dual4_ratio(k: usize, seed: Seed) -> Result<f64> {
    let set = crate::setgen::gen_squares(k * k);
    let mut rng = seed.rng();
    let vals: Vec<Complex64> = (0..k)
        .map(|_| {
            // uniform on the unit disk
            let r = rng.random::<f64>().sqrt();
            Complex64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
        })
        .collect();
    let c = CoefficientSeq::new(set, vals, DomainTag::Unconstrained)?;
    let l2 = c.l2_norm_sq().sqrt();
    Ok(crate::expsum::lp_norm_even_exact(&c, 4.0)? / l2)
}

/// Norms of `Σ_{n≤K} e(n²θ)` over a sweep of `K` with fitted exponents, plus the
/// `L⁴` ratio for random coefficients on the squares.
pub fn squares_kink(p_grid: &[f64], terms: &[usize], dual_trials: usize, seed: Seed) -> Result<KinkReport> {
    if terms.is_empty() || terms.windows(2).any(|w| w[0] >= w[1]) || terms[terms.len() - 1] > MAX_SQUARE_TERMS {
        return domain(format!("term counts must increase and stay ≤ {MAX_SQUARE_TERMS}"));
    }
    if terms[0] == 0 {
        return domain("term counts must be positive");
    }
    if p_grid.iter().any(|p| !(2.0..=8.0).contains(p)) {
        return domain("p must lie in [2, 8]");
    }
    let ks: Vec<f64> = terms.iter().map(|&k| k as f64).collect();
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        let norms = terms
            .par_iter()
            .map(|&k| squares_norm(k, p))
            .collect::<Result<Vec<_>>>()?;
        let slope = fit_loglog(&ks, &norms).map(|f| f.slope);
        rows.push(KinkRow {
            p,
            slope_terms: slope,
            slope_ambient: slope.map(|s| s / 2.0),
            predicted_terms: if p <= 4.0 { 0.5 } else { 1.0 - 2.0 / p },
            norms,
        });
    }
    let dual4_ratios = terms
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let vals = (0..dual_trials.max(1))
                .map(|t| dual4_ratio(k, seed.child(i as u64).child(t as u64)))
                .collect::<Result<Vec<_>>>()?;
            Ok(vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = terms.iter().map(|&k| (k * k) as f64).collect();
    Ok(KinkReport {
        terms: terms.to_vec(),
        rows,
        dual4_slope_ambient: fit_loglog(&ns, &dual4_ratios).map(|f| f.slope),
        dual4_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_exponent_examples() {
        let b = |d| Family::Bernoulli { delta: d };
        let e = |f: &Family, p| predicted_exponent(f, Statistic::DirichletNormP, p).unwrap();
        assert!((e(&b(0.25), 3.0).exponent - 1.25).abs() < 1e-15);
        assert!((e(&b(0.75), 3.0).exponent - 0.375).abs() < 1e-15);
        assert!((e(&b(0.4), 2.0).exponent - 0.6).abs() < 1e-15);
        assert!((e(&b(0.25), 4.0).exponent - 2.0).abs() < 1e-15);
        assert!((e(&b(0.25), 4.0).crossover - 0.5).abs() < 1e-15);
        let ap = Family::PerturbedAp { beta: 0.5, a_factor: 4 };
        assert!((e(&ap, 4.0).exponent - 2.5).abs() < 1e-15);
        assert!((e(&ap, 4.0).crossover - 1.0).abs() < 1e-15);
        assert!(predicted_exponent(&b(0.5), Statistic::StarRatio, 3.0).is_none());
    }

    #[test]
    fn loglog_fit_recovers_power() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.7)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope - 1.7).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.residual_rms < 1e-12);
        let t = fit_two_term(&xs, &xs.map(|x| 2.0 * x + 0.5 * x * x), (1.0, 2.0)).unwrap();
        assert!((t.coefficients.0 - 2.0).abs() < 1e-9 && (t.coefficients.1 - 0.5).abs() < 1e-9 && t.positive);
    }

    #[test]
    fn baselines_trivial_cases() {
        let full = FrequencySet::full(64);
        assert!((baseline_bounds(&full, 3.0, 1.7).unwrap().hausdorff_young_ratio_bound - 1.7).abs() < 1e-14);
        let one = FrequencySet::new(64, vec![9]).unwrap();
        assert!((baseline_bounds(&one, 4.0, 1.0).unwrap().trivial_lower_bound - 64f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn perturbed_family_parameters() {
        let f = Family::PerturbedAp { beta: 0.5, a_factor: 4 };
        let m = f.model_at(64, 4.0).unwrap();
        assert_eq!(m.kind, ModelKind::PerturbedAp { b: 9, a: 32, len: 64, s: 8 });
        assert_eq!(m.ambient, 32 * 64);
    }

    #[test]
    fn dirichlet_power_even_and_odd() {
        let full = FrequencySet::full(20);
        let g = GridSpec::default_for(20);
        assert_eq!(dirichlet_power(&full, 2.0, &g).unwrap(), 20.0);
        // (2N³ + N)/3
        assert_eq!(dirichlet_power(&full, 4.0, &g).unwrap(), 5340.0);
        let one = FrequencySet::new(20, vec![7]).unwrap();
        assert!((dirichlet_power(&one, 3.0, &g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(Family::Full, vec![4, 8], 4.0, 8, Seed::new(1), Statistic::DirichletNormP);
        assert!(c.validate().is_ok());
        c.sizes = vec![8, 4];
        assert!(c.validate().is_err());
        c.sizes = vec![4, 8];
        c.trials = 7;
        assert!(c.validate().is_err());
    }
}
