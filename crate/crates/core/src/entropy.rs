//! Lévy means, the dual Sudakov bound, and packing/covering counts on finite
//! point clouds.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::expsum::{power_mean, GridEvaluator, GridSpec};
use crate::scalar::CompensatedSum;
use crate::setgen::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case")]
pub enum NormKind {
    L1,
    Linf,
    L2,
    /// `x ↦ ‖Σ_i x_i e(f_i θ)‖_{L^q(dθ)}`
    TrigLq { q: f64, freqs: Vec<usize> },
}

/// A norm on `ℝ^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormOracle {
    dim: usize,
    kind: NormKind,
    #[serde(skip)]
    grid_points: usize,
}

/// Scratch space for [`NormOracle::norm_with`].
pub struct NormWorkspace {
    eval: Option<(GridEvaluator<f64>, Vec<Complex64>, Vec<Complex64>)>,
}

impl NormOracle {
    pub fn l1(dim: usize) -> Result<Self> {
        Self::new(dim, NormKind::L1)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(dim, NormKind::Linf)
    }

    pub fn l2(dim: usize) -> Result<Self> {
        Self::new(dim, NormKind::L2)
    }

    /// `L^q` norm of `Σ_{j≤n} x_j e(jθ)`.
    pub fn trig_lq(dim: usize, q: f64) -> Result<Self> {
        Self::new(dim, NormKind::TrigLq { q, freqs: (1..=dim).collect() })
    }

    pub fn new(dim: usize, kind: NormKind) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        let mut grid_points = 0;
        if let NormKind::TrigLq { q, freqs } = &kind {
            if !(*q >= 2.0) || !q.is_finite() {
                return domain(format!("q = {q} must be at least 2"));
            }
            if freqs.len() != dim || freqs.contains(&0) {
                return domain("need one positive frequency per coordinate");
            }
            let top = *freqs.iter().max().unwrap();
            // M > q·max f makes the quadrature exact for even q
            grid_points = GridSpec::for_ambient(top, (2.0 * q.ceil()).max(8.0))?.points();
        }
        Ok(Self { dim, kind, grid_points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            NormKind::L1 => "l1".into(),
            NormKind::Linf => "linf".into(),
            NormKind::L2 => "l2".into(),
            NormKind::TrigLq { q, .. } => format!("trig_l{q}"),
        }
    }

    pub fn workspace(&self) -> NormWorkspace {
        NormWorkspace {
            eval: (self.grid_points > 0).then(|| {
                (
                    GridEvaluator::new(self.grid_points),
                    vec![Complex64::new(0.0, 0.0); self.dim],
                    vec![Complex64::new(0.0, 0.0); self.grid_points],
                )
            }),
        }
    }

    pub fn norm_with(&self, ws: &mut NormWorkspace, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            NormKind::L1 => x.iter().map(|v| v.abs()).collect::<CompensatedSum<f64>>().value(),
            NormKind::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormKind::L2 => x.iter().map(|v| v * v).collect::<CompensatedSum<f64>>().value().sqrt(),
            NormKind::TrigLq { q, freqs } => {
                let (eval, coeffs, buf) = ws.eval.as_mut().expect("workspace from this oracle");
                for (c, v) in coeffs.iter_mut().zip(x) {
                    *c = Complex64::new(*v, 0.0);
                }
                eval.synthesize(freqs, coeffs, buf);
                power_mean(buf, *q).powf(q.recip())
            }
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.norm_with(&mut self.workspace(), x)
    }

    /// `‖x − y‖`.
    pub fn dist_with(&self, ws: &mut NormWorkspace, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.norm_with(ws, &d)
    }
}

/// `α_n = Γ(n/2) / (Γ((n+1)/2)·√2)`.
pub fn alpha_n(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    (ln_gamma(h) - ln_gamma(h + 0.5)).exp() / std::f64::consts::SQRT_2
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LevyMeanEstimate {
    /// `M̂_X = α_n · mean ‖g‖`
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub alpha_n: f64,
    /// `mean ‖g‖` without the normalizer.
    pub gaussian_mean: f64,
}

const LEVY_CHUNK: usize = 256;

/// Estimates `M_X = ∫_{S^{n−1}} ‖x‖ dσ(x)` as `α_n E‖g‖`, `g` standard Gaussian.
pub fn levy_mean(oracle: &NormOracle, samples: usize, seed: Seed) -> Result<LevyMeanEstimate> {
    if samples < 2 {
        return domain("need at least two samples");
    }
    let n = oracle.dim();
    let chunks = samples.div_ceil(LEVY_CHUNK);
    let values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let len = LEVY_CHUNK.min(samples - c * LEVY_CHUNK);
            let mut rng = seed.child(c as u64).rng();
            let mut ws = oracle.workspace();
            let mut g = vec![0.0; n];
            (0..len)
                .map(|_| {
                    g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                    oracle.norm_with(&mut ws, &g)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let m = values.iter().copied().collect::<CompensatedSum<f64>>().value() / samples as f64;
    let var = values.iter().map(|v| (v - m).powi(2)).collect::<CompensatedSum<f64>>().value() / (samples - 1) as f64;
    let a = alpha_n(n);
    Ok(LevyMeanEstimate {
        mean: a * m,
        std_error: a * (var / samples as f64).sqrt(),
        samples,
        alpha_n: a,
        gaussian_mean: m,
    })
}

/// `C·n·(M_X/t)²`, the dual Sudakov bound on `log E(Bⁿ, B_X, t)`.
pub fn dual_sudakov_rhs(m_x: f64, n: usize, t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("t = {t} must be positive"));
    }
    Ok(c * n as f64 * (m_x / t).powi(2))
}

pub const MAX_CLOUD_POINTS: usize = 10_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackCover {
    pub packing_size: usize,
    pub greedy_cover_size: usize,
    /// Indices of the `t`-separated points, in selection order.
    pub packing: Vec<usize>,
    /// Subset of `packing` that still covers every point at radius `t`.
    pub cover: Vec<usize>,
}

/// Greedy maximal packing (`‖y_j − y_k‖ ≥ t`) scanned in input order. By
/// maximality its centers cover the cloud at radius `t`; the cover is that set
/// with redundant centers removed, so `cover ≤ packing`.
pub fn greedy_packing_cover(points: &[Vec<f64>], oracle: &NormOracle, t: f64) -> Result<PackCover> {
    if !(t > 0.0) {
        return domain(format!("t = {t} must be positive"));
    }
    if points.len() > MAX_CLOUD_POINTS {
        return domain(format!("{} points exceed the cap {MAX_CLOUD_POINTS}", points.len()));
    }
    if points.iter().any(|p| p.len() != oracle.dim()) {
        return domain("point dimension does not match the norm");
    }
    if points.is_empty() {
        return Ok(PackCover {
            packing_size: 0,
            greedy_cover_size: 0,
            packing: vec![],
            cover: vec![],
        });
    }
    let mut ws = oracle.workspace();
    let mut packing: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if packing.iter().all(|&j| oracle.dist_with(&mut ws, p, &points[j]) >= t) {
            packing.push(i);
        }
    }
    // covered_by[i] = number of packing centers within t of point i
    let near: Vec<Vec<usize>> = packing
        .iter()
        .map(|&c| {
            (0..points.len())
                .filter(|&i| oracle.dist_with(&mut ws, &points[i], &points[c]) <= t)
                .collect()
        })
        .collect();
    let mut covered_by = vec![0usize; points.len()];
    for list in &near {
        for &i in list {
            covered_by[i] += 1;
        }
    }
    let mut keep = vec![true; packing.len()];
    for k in (0..packing.len()).rev() {
        if near[k].iter().all(|&i| covered_by[i] >= 2) {
            keep[k] = false;
            for &i in &near[k] {
                covered_by[i] -= 1;
            }
        }
    }
    let cover: Vec<usize> = packing.iter().zip(&keep).filter(|(_, &k)| k).map(|(&c, _)| c).collect();
    Ok(PackCover {
        packing_size: packing.len(),
        greedy_cover_size: cover.len(),
        packing,
        cover,
    })
}

pub const MAX_VOLUME_DIM: usize = 6;

/// Uniform draws from `B_X` by rejection from `[−1, 1]^n`. Every supported norm
/// dominates `max_i |x_i|`, so the cube contains the ball.
pub fn sample_unit_ball(oracle: &NormOracle, count: usize, seed: Seed) -> Vec<Vec<f64>> {
    let mut rng = seed.rng();
    let mut ws = oracle.workspace();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..oracle.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if oracle.norm_with(&mut ws, &x) <= 1.0 {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VolumeCheck {
    pub measured_packing: usize,
    /// `(4/t)^n`
    pub bound: f64,
    pub ok: bool,
}

/// Greedy `t`-packing of `samples` random points of `B_X` against `D(B_X, B_X, t) ≤ (4/t)^n`.
pub fn volume_bound_check(oracle: &NormOracle, t: f64, samples: usize, seed: Seed) -> Result<VolumeCheck> {
    let n = oracle.dim();
    if n > MAX_VOLUME_DIM {
        return domain(format!("dimension {n} above {MAX_VOLUME_DIM}"));
    }
    if !(t > 0.0 && t <= 1.0) {
        return domain(format!("t = {t} outside (0, 1]"));
    }
    let pts = sample_unit_ball(oracle, samples, seed);
    let pc = greedy_packing_cover(&pts, oracle, t)?;
    let bound = (4.0 / t).powi(n as i32);
    Ok(VolumeCheck {
        measured_packing: pc.packing_size,
        bound,
        ok: pc.packing_size as f64 <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_small_cases() {
        assert!((alpha_n(1) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-13);
        // Γ(1)/(Γ(3/2)√2) = 2/√(2π)
        assert!((alpha_n(2) - 2.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
        for n in [2, 5, 50, 5000] {
            let s = alpha_n(n) * (n as f64).sqrt();
            assert!((0.9..=1.5).contains(&s), "{n}: {s}");
        }
    }

    #[test]
    fn norms_on_simple_vectors() {
        let x = [3.0, -4.0];
        assert_eq!(NormOracle::l1(2).unwrap().norm(&x), 7.0);
        assert_eq!(NormOracle::linf(2).unwrap().norm(&x), 4.0);
        assert!((NormOracle::l2(2).unwrap().norm(&x) - 5.0).abs() < 1e-15);
        assert!((NormOracle::trig_lq(2, 2.0).unwrap().norm(&x) - 5.0).abs() < 1e-12);
        assert!(NormOracle::trig_lq(2, 1.5).is_err());
    }

    #[test]
    fn sudakov_arithmetic() {
        assert_eq!(dual_sudakov_rhs(1.0, 10, 1.0, 1.0).unwrap(), 10.0);
        let a = dual_sudakov_rhs(0.7, 12, 0.3, 2.0).unwrap();
        let b = dual_sudakov_rhs(0.7, 12, 0.6, 2.0).unwrap();
        assert!((a / 4.0 - b).abs() < 1e-12 * a);
        assert!(dual_sudakov_rhs(1.0, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn packing_small_cases() {
        let l1 = NormOracle::l1(2).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert_eq!(greedy_packing_cover(&pts, &l1, 0.5).unwrap().packing_size, 2);
        assert_eq!(greedy_packing_cover(&pts, &l1, 1.5).unwrap().packing_size, 1);
    }

    #[test]
    fn one_dimensional_volume() {
        let r = volume_bound_check(&NormOracle::l1(1).unwrap(), 0.5, 2000, Seed::new(4)).unwrap();
        assert!(r.measured_packing <= 5 && r.ok);
        assert_eq!(r.bound, 8.0);
    }
}
