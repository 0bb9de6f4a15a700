use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{as_even_exponent, lp_norm_even_exact, CoefficientSeq, FrequencySet, GridSpec};
use crate::error::{domain, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Relative-change threshold of the grid-doubling ladder.
pub const LADDER_TOL: f64 = 1e-9;
/// Largest grid the ladder will try.
pub const LADDER_CAP: usize = 1 << 24;

/// Reusable forward/inverse transforms for one grid size.
pub struct GridEvaluator<T: Scalar> {
    points: usize,
    inverse: Arc<dyn Fft<T>>,
    forward: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> GridEvaluator<T> {
    pub fn new(points: usize) -> Self {
        let mut planner = FftPlanner::new();
        let inverse = planner.plan_fft_inverse(points);
        let forward = planner.plan_fft_forward(points);
        let scratch_len = inverse
            .get_inplace_scratch_len()
            .max(forward.get_inplace_scratch_len());
        Self {
            points,
            inverse,
            forward,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Writes `f(θ_m) = Σ a_n e(n m / M)` into `out` (length `M`).
    pub fn synthesize(&mut self, freqs: &[usize], values: &[Complex<T>], out: &mut [Complex<T>]) {
        debug_assert_eq!(out.len(), self.points);
        out.fill(Complex::new(T::zero(), T::zero()));
        for (&n, &a) in freqs.iter().zip(values) {
            out[n % self.points] = out[n % self.points] + a;
        }
        self.inverse.process_with_scratch(out, &mut self.scratch);
    }

    /// Replaces `samples` by its Fourier coefficients `M⁻¹ Σ_m h_m e(−k m / M)`
    /// and gathers the ones at `freqs` into `out`.
    pub fn analyze(&mut self, samples: &mut [Complex<T>], freqs: &[usize], out: &mut [Complex<T>]) {
        debug_assert_eq!(samples.len(), self.points);
        self.forward.process_with_scratch(samples, &mut self.scratch);
        let scale = T::one() / T::of(self.points as f64);
        for (o, &n) in out.iter_mut().zip(freqs) {
            *o = samples[n % self.points] * scale;
        }
    }
}

/// Values of `Σ a_n e(nθ)` at `θ_m = m / M`.
pub fn evaluate_on_grid<T: Scalar>(coeffs: &CoefficientSeq<T>, grid: &GridSpec) -> Result<Vec<Complex<T>>> {
    grid.check(coeffs.support().ambient_size())?;
    let mut eval = GridEvaluator::new(grid.points());
    let mut out = vec![Complex::new(T::zero(), T::zero()); grid.points()];
    eval.synthesize(coeffs.support().elems(), coeffs.values(), &mut out);
    Ok(out)
}

/// `M⁻¹ Σ_m |f_m|^p`, summed in index order.
pub fn power_mean<T: Scalar>(values: &[Complex<T>], p: T) -> T {
    let half = p / T::of(2.0);
    let acc: CompensatedSum<T> = values.iter().map(|v| v.norm_sqr().powf(half)).collect();
    acc.value() / T::of(values.len() as f64)
}

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if !(p >= T::one()) {
        return domain(format!("exponent p = {p} must be at least 1"));
    }
    Ok(())
}

/// Trapezoid quadrature `(M⁻¹ Σ_m |f(θ_m)|^p)^{1/p}` on a fixed grid.
pub fn lp_norm<T: Scalar>(coeffs: &CoefficientSeq<T>, p: T, grid: &GridSpec) -> Result<T> {
    check_p(p)?;
    let values = evaluate_on_grid(coeffs, grid)?;
    Ok(power_mean(&values, p).powf(p.recip()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveNorm<T> {
    pub value: T,
    pub points: usize,
    pub converged: bool,
}

/// Quadrature norm refined by doubling `M` until the relative change drops below
/// `tol` (or the grid reaches [`LADDER_CAP`]).
pub fn lp_norm_adaptive<T: Scalar>(
    coeffs: &CoefficientSeq<T>,
    p: T,
    grid: &GridSpec,
    tol: T,
) -> Result<AdaptiveNorm<T>> {
    check_p(p)?;
    grid.check(coeffs.support().ambient_size())?;
    let tol = tol.max(T::rel_floor());
    let mut g = *grid;
    let mut prev = lp_norm(coeffs, p, &g)?;
    while g.points() < LADDER_CAP {
        g = g.doubled();
        let next = lp_norm(coeffs, p, &g)?;
        let scale = next.abs().max(T::min_positive_value());
        let change = (next - prev).abs() / scale;
        prev = next;
        if change < tol || next == T::zero() {
            return Ok(AdaptiveNorm {
                value: next,
                points: g.points(),
                converged: true,
            });
        }
    }
    Ok(AdaptiveNorm {
        value: prev,
        points: g.points(),
        converged: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Exact,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue<T> {
    pub value: T,
    pub method: NormMethod,
    /// Final grid size for quadrature, 0 for the exact path.
    pub points: usize,
}

/// Exact convolution norm for even integer `p`, adaptive quadrature otherwise.
pub fn norm_auto<T: Scalar>(coeffs: &CoefficientSeq<T>, p: T, grid: &GridSpec) -> Result<NormValue<T>> {
    check_p(p)?;
    if as_even_exponent(p).is_some() {
        if let Ok(value) = lp_norm_even_exact(coeffs, p) {
            return Ok(NormValue {
                value,
                method: NormMethod::Exact,
                points: 0,
            });
        }
    }
    let r = lp_norm_adaptive(coeffs, p, grid, T::of(LADDER_TOL))?;
    Ok(NormValue {
        value: r.value,
        method: NormMethod::Quadrature,
        points: r.points,
    })
}

/// `‖Σ_{n∈A} e(n·)‖_p` on a fixed grid.
pub fn dirichlet_norm<T: Scalar>(set: &FrequencySet, p: T, grid: &GridSpec) -> Result<T> {
    lp_norm(&CoefficientSeq::indicator(set.clone()), p, grid)
}
