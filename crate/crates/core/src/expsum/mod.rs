//! Exponential sums `f(θ) = Σ_{n∈A} a_n e(nθ)` on the circle, their `L^p` norms by
//! FFT quadrature, and exact combinatorial norms for even integer exponents.
//!
//! `e(x)` is `exp(2πi x)` throughout and `dθ` is the probability measure on `[0, 1)`.

mod eval;
mod exact;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use eval::{
    dirichlet_norm, evaluate_on_grid, lp_norm, lp_norm_adaptive, norm_auto, power_mean,
    GridEvaluator, NormMethod, NormValue, AdaptiveNorm, LADDER_CAP, LADDER_TOL,
};
pub use exact::{
    as_even_exponent, autocorrelation, autocorrelation_direct, autocorrelation_fft,
    dirichlet_even_moment, indicator_autocorrelation, lp_norm_even_exact, Autocorrelation,
};

/// Finite set of integer frequencies inside `[1, ambient_size]`, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencySet {
    ambient_size: usize,
    elems: Vec<usize>,
}

impl FrequencySet {
    /// Builds a set from a strictly increasing list.
    pub fn new(ambient_size: usize, elems: Vec<usize>) -> Result<Self> {
        if ambient_size == 0 {
            return Err(Error::InvalidSet("ambient size must be positive".into()));
        }
        if let Some(w) = elems.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSet(format!(
                "elements not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(&bad) = elems.iter().find(|&&n| n == 0 || n > ambient_size) {
            return Err(Error::InvalidSet(format!(
                "element {bad} outside [1, {ambient_size}]"
            )));
        }
        Ok(Self {
            ambient_size,
            elems,
        })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(ambient_size: usize, mut elems: Vec<usize>) -> Result<Self> {
        elems.sort_unstable();
        elems.dedup();
        Self::new(ambient_size, elems)
    }

    /// `[1, n]`.
    pub fn full(n: usize) -> Self {
        Self {
            ambient_size: n.max(1),
            elems: (1..=n).collect(),
        }
    }

    pub fn empty(ambient_size: usize) -> Self {
        Self {
            ambient_size: ambient_size.max(1),
            elems: Vec::new(),
        }
    }

    pub fn ambient_size(&self) -> usize {
        self.ambient_size
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn min(&self) -> Option<usize> {
        self.elems.first().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.elems.last().copied()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.elems.binary_search(&n).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elems.iter().copied()
    }
}

/// Constraint the coefficient vector is declared to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    /// `|a_n| ≤ 1` for every `n`.
    LinfBall,
    /// `Σ |a_n|² ≤ 1`.
    L2Ball,
    Unconstrained,
}

const CONSTRAINT_SLACK: f64 = 1e-12;

/// Complex coefficients `a_n` attached to a [`FrequencySet`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSeq<T> {
    support: FrequencySet,
    values: Vec<Complex<T>>,
    domain: DomainTag,
}

impl<T: Scalar> CoefficientSeq<T> {
    pub fn new(support: FrequencySet, values: Vec<Complex<T>>, domain: DomainTag) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::InvalidSet(format!(
                "{} coefficients for a support of size {}",
                values.len(),
                support.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        let slack = T::of(CONSTRAINT_SLACK).max(T::rel_floor());
        match domain {
            DomainTag::LinfBall => {
                if let Some(v) = values.iter().find(|v| v.norm() > T::one() + slack) {
                    return Err(Error::Domain(format!("|a_n| = {} exceeds 1", v.norm())));
                }
            }
            DomainTag::L2Ball => {
                let s = l2_sq(&values);
                if s > T::one() + slack {
                    return Err(Error::Domain(format!("Σ|a_n|² = {s} exceeds 1")));
                }
            }
            DomainTag::Unconstrained => {}
        }
        Ok(Self {
            support,
            values,
            domain,
        })
    }

    /// All-ones coefficients: the Dirichlet kernel of the set.
    pub fn indicator(support: FrequencySet) -> Self {
        let values = vec![Complex::new(T::one(), T::zero()); support.len()];
        Self {
            support,
            values,
            domain: DomainTag::LinfBall,
        }
    }

    /// All-equal coefficients with unit `ℓ²` norm (empty set gives the zero vector).
    pub fn normalized_indicator(support: FrequencySet) -> Self {
        let c = if support.is_empty() {
            T::zero()
        } else {
            T::one() / T::of(support.len() as f64).sqrt()
        };
        let values = vec![Complex::new(c, T::zero()); support.len()];
        Self {
            support,
            values,
            domain: DomainTag::L2Ball,
        }
    }

    pub fn support(&self) -> &FrequencySet {
        &self.support
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// True when every coefficient is exactly `1`.
    pub fn is_indicator(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re == T::one() && v.im == T::zero())
    }

    /// `Σ |a_n|²`.
    pub fn l2_norm_sq(&self) -> T {
        l2_sq(&self.values)
    }

    pub fn with_domain(mut self, domain: DomainTag) -> Result<Self> {
        let values = std::mem::take(&mut self.values);
        Self::new(self.support, values, domain)
    }
}

fn l2_sq<T: Scalar>(values: &[Complex<T>]) -> T {
    values
        .iter()
        .map(|v| v.norm_sqr())
        .collect::<crate::scalar::CompensatedSum<T>>()
        .value()
}

/// Default oversampling of the quadrature grid relative to the ambient size.
pub const DEFAULT_OVERSAMPLE: f64 = 8.0;
/// Minimal oversampling accepted by [`GridSpec::for_ambient`].
pub const MIN_OVERSAMPLE: f64 = 4.0;

/// Uniform grid `θ_m = m / M`, `M` a power of two.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    points: usize,
    oversample: f64,
}

impl GridSpec {
    /// Smallest power of two `M ≥ oversample · ambient`.
    pub fn for_ambient(ambient: usize, oversample: f64) -> Result<Self> {
        if !(oversample >= MIN_OVERSAMPLE) || !oversample.is_finite() {
            return Err(Error::Domain(format!(
                "oversample {oversample} below minimum {MIN_OVERSAMPLE}"
            )));
        }
        let target = (oversample * ambient.max(1) as f64).ceil() as usize;
        Ok(Self {
            points: target.next_power_of_two(),
            oversample,
        })
    }

    /// Grid with the default oversample of 8.
    pub fn default_for(ambient: usize) -> Self {
        Self::for_ambient(ambient, DEFAULT_OVERSAMPLE).expect("default oversample is valid")
    }

    /// Explicit number of points (must be a power of two).
    pub fn with_points(points: usize) -> Result<Self> {
        if points == 0 || !points.is_power_of_two() {
            return Err(Error::Domain(format!("grid size {points} is not a power of two")));
        }
        Ok(Self {
            points,
            oversample: MIN_OVERSAMPLE,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn oversample(&self) -> f64 {
        self.oversample
    }

    pub fn doubled(&self) -> Self {
        Self {
            points: self.points * 2,
            oversample: self.oversample * 2.0,
        }
    }

    /// Rejects grids with fewer than `4 · ambient` points.
    pub fn check(&self, ambient: usize) -> Result<()> {
        let required = 4 * ambient.max(1);
        if self.points < required {
            return Err(Error::Sizing {
                points: self.points,
                ambient,
                required,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_set_validation() {
        assert!(FrequencySet::new(10, vec![1, 3, 10]).is_ok());
        assert!(FrequencySet::new(10, vec![3, 1]).is_err());
        assert!(FrequencySet::new(10, vec![1, 1]).is_err());
        assert!(FrequencySet::new(10, vec![0, 1]).is_err());
        assert!(FrequencySet::new(10, vec![11]).is_err());
        assert!(FrequencySet::new(0, vec![]).is_err());
        let s = FrequencySet::from_unsorted(10, vec![5, 2, 5, 9]).unwrap();
        assert_eq!(s.elems(), &[2, 5, 9]);
        assert!(s.contains(5) && !s.contains(3));
        assert_eq!(FrequencySet::full(4).elems(), &[1, 2, 3, 4]);
    }

    #[test]
    fn coefficient_domains() {
        let s = FrequencySet::new(4, vec![1, 2]).unwrap();
        let big = vec![Complex::new(1.5, 0.0), Complex::new(0.0, 0.0)];
        assert!(CoefficientSeq::<f64>::new(s.clone(), big.clone(), DomainTag::LinfBall).is_err());
        assert!(CoefficientSeq::<f64>::new(s.clone(), big, DomainTag::Unconstrained).is_ok());
        let half = vec![Complex::new(0.8, 0.0), Complex::new(0.0, 0.6)];
        assert!(CoefficientSeq::<f64>::new(s.clone(), half.clone(), DomainTag::L2Ball).is_ok());
        let over = vec![Complex::new(0.8, 0.0), Complex::new(0.0, 0.61)];
        assert!(CoefficientSeq::<f64>::new(s.clone(), over, DomainTag::L2Ball).is_err());
        assert!(CoefficientSeq::<f64>::new(s, vec![Complex::new(1.0, 0.0)], DomainTag::LinfBall).is_err());
    }

    #[test]
    fn indicator_helpers() {
        let s = FrequencySet::new(9, vec![1, 4, 9]).unwrap();
        let ind = CoefficientSeq::<f64>::indicator(s.clone());
        assert!(ind.is_indicator());
        assert_eq!(ind.l2_norm_sq(), 3.0);
        let n = CoefficientSeq::<f64>::normalized_indicator(s);
        assert!(!n.is_indicator());
        assert!((n.l2_norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_sizing() {
        let g = GridSpec::default_for(100);
        assert_eq!(g.points(), 1024);
        assert!(g.check(100).is_ok());
        assert!(GridSpec::for_ambient(10, 3.0).is_err());
        assert!(GridSpec::with_points(48).is_err());
        let small = GridSpec::with_points(16).unwrap();
        assert!(matches!(small.check(5), Err(Error::Sizing { required: 20, .. })));
        assert_eq!(small.doubled().points(), 32);
    }
}
