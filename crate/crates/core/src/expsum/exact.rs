use num_complex::Complex;

use super::{CoefficientSeq, FrequencySet, GridEvaluator};
use crate::error::{domain, Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Pair products `r(ℓ) = Σ_{n−m=ℓ} a_n conj(a_m)` for lags `|ℓ| < N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Autocorrelation<T> {
    max_lag: usize,
    counts: Vec<Complex<T>>,
}

impl<T: Scalar> Autocorrelation<T> {
    fn zeros(ambient: usize) -> Self {
        let max_lag = ambient.saturating_sub(1);
        Self {
            max_lag,
            counts: vec![Complex::new(T::zero(), T::zero()); 2 * max_lag + 1],
        }
    }

    /// Largest representable lag, `N − 1`.
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// Value at `lag`; zero outside the stored range.
    pub fn get(&self, lag: i64) -> Complex<T> {
        if lag.unsigned_abs() as usize > self.max_lag {
            return Complex::new(T::zero(), T::zero());
        }
        self.counts[(lag + self.max_lag as i64) as usize]
    }

    /// `(lag, value)` pairs from `−(N−1)` to `N−1`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let off = self.max_lag as i64;
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - off, c))
    }

    pub fn counts(&self) -> &[Complex<T>] {
        &self.counts
    }
}

/// Threshold on `|A|²` above which [`autocorrelation`] switches to the FFT path.
const DIRECT_PAIR_LIMIT: usize = 1 << 16;

pub fn autocorrelation<T: Scalar>(coeffs: &CoefficientSeq<T>) -> Autocorrelation<T> {
    let k = coeffs.support().len();
    if k.saturating_mul(k) <= DIRECT_PAIR_LIMIT {
        autocorrelation_direct(coeffs)
    } else {
        autocorrelation_fft(coeffs)
    }
}

pub fn autocorrelation_direct<T: Scalar>(coeffs: &CoefficientSeq<T>) -> Autocorrelation<T> {
    let mut out = Autocorrelation::zeros(coeffs.support().ambient_size());
    let off = out.max_lag as i64;
    let freqs = coeffs.support().elems();
    let vals = coeffs.values();
    for (&n, &an) in freqs.iter().zip(vals) {
        for (&m, &am) in freqs.iter().zip(vals) {
            let idx = (n as i64 - m as i64 + off) as usize;
            out.counts[idx] = out.counts[idx] + an * am.conj();
        }
    }
    out
}

/// Fourier coefficients of `|f|²` on a grid of at least `4N` points.
pub fn autocorrelation_fft<T: Scalar>(coeffs: &CoefficientSeq<T>) -> Autocorrelation<T> {
    let ambient = coeffs.support().ambient_size();
    let mut out = Autocorrelation::zeros(ambient);
    let points = (4 * ambient).next_power_of_two();
    let mut eval = GridEvaluator::new(points);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); points];
    eval.synthesize(coeffs.support().elems(), coeffs.values(), &mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), T::zero());
    }
    let lags: Vec<usize> = (0..out.counts.len())
        .map(|i| {
            let lag = i as i64 - out.max_lag as i64;
            lag.rem_euclid(points as i64) as usize
        })
        .collect();
    let mut vals = vec![Complex::new(T::zero(), T::zero()); lags.len()];
    eval.analyze(&mut buf, &lags, &mut vals);
    out.counts = vals;
    out
}

/// Exact integer autocorrelation of the indicator of `set`: entry `i` holds
/// `A_ℓ = #{(n, m) ∈ A² : n − m = ℓ}` for `ℓ = i − (N−1)`.
pub fn indicator_autocorrelation(set: &FrequencySet) -> Vec<u64> {
    let max_lag = set.ambient_size() - 1;
    let mut counts = vec![0u64; 2 * max_lag + 1];
    for n in set.iter() {
        for m in set.iter() {
            counts[n + max_lag - m] += 1;
        }
    }
    counts
}

/// `Some(k)` when `p = 2k` for a positive integer `k`.
pub fn as_even_exponent<T: Scalar>(p: T) -> Option<u32> {
    let p = p.as_f64();
    if p >= 2.0 && p.fract() == 0.0 && p <= 2.0 * u32::MAX as f64 && (p as u64).is_multiple_of(2) {
        Some((p as u64 / 2) as u32)
    } else {
        None
    }
}

/// `‖Σ_{n∈A} e(n·)‖_{2k}^{2k}` in exact integer arithmetic: the number of
/// solutions of `n_1 + … + n_k = m_1 + … + m_k` with all entries in `A`.
///
/// Fails with a domain error if an intermediate count would overflow.
pub fn dirichlet_even_moment(set: &FrequencySet, k: u32) -> Result<u128> {
    if k == 0 {
        return domain("moment order must be positive");
    }
    let size = set.len() as u128;
    if set.is_empty() {
        return Ok(0);
    }
    if k == 1 {
        return Ok(size);
    }
    // c_{k-1}(n) ≤ |A|^{k-1} bounds every intermediate count.
    let mut bound: u128 = 1;
    for _ in 0..(k - 1) {
        bound = bound
            .checked_mul(size)
            .filter(|&b| b <= u64::MAX as u128)
            .ok_or_else(|| Error::Domain(format!("{k}-fold representation counts overflow u64")))?;
    }
    let (lo, hi) = (set.min().unwrap(), set.max().unwrap());
    let span = hi - lo;
    // c_j lives on [j·lo, j·hi]; stored with offset j·lo.
    let mut cur = vec![0u64; span + 1];
    for n in set.iter() {
        cur[n - lo] = 1;
    }
    for j in 2..=k as usize {
        let mut next = vec![0u64; j * span + 1];
        for (i, &c) in cur.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for n in set.iter() {
                next[i + n - lo] += c;
            }
        }
        cur = next;
    }
    let mut total: u128 = 0;
    for &c in &cur {
        let sq = (c as u128) * (c as u128);
        total = total
            .checked_add(sq)
            .ok_or_else(|| Error::Domain("even moment overflows u128".into()))?;
    }
    Ok(total)
}

/// `‖f‖_p` for even integer `p = 2k` via Plancherel for the `k`-fold self-convolution.
/// Indicator coefficients go through [`dirichlet_even_moment`].
pub fn lp_norm_even_exact<T: Scalar>(coeffs: &CoefficientSeq<T>, p: T) -> Result<T> {
    let k = as_even_exponent(p).ok_or_else(|| Error::Domain(format!("p = {p} is not an even integer")))?;
    let set = coeffs.support();
    if set.is_empty() {
        return Ok(T::zero());
    }
    let inv_p = T::one() / T::of(2.0 * k as f64);
    if coeffs.is_indicator() {
        if let Ok(m) = dirichlet_even_moment(set, k) {
            return Ok(T::of(m as f64).powf(inv_p));
        }
    }
    let (lo, hi) = (set.min().unwrap(), set.max().unwrap());
    let span = hi - lo;
    let zero = Complex::new(T::zero(), T::zero());
    let mut cur = vec![zero; span + 1];
    for (n, &a) in set.iter().zip(coeffs.values()) {
        cur[n - lo] = a;
    }
    for j in 2..=k as usize {
        let mut next = vec![zero; j * span + 1];
        for (i, &c) in cur.iter().enumerate() {
            if c == zero {
                continue;
            }
            for (n, &a) in set.iter().zip(coeffs.values()) {
                next[i + n - lo] = next[i + n - lo] + c * a;
            }
        }
        cur = next;
    }
    let total: CompensatedSum<T> = cur.iter().map(|c| c.norm_sqr()).collect();
    Ok(total.value().powf(inv_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::DomainTag;
    use num_complex::Complex64;

    fn set(n: usize, v: &[usize]) -> FrequencySet {
        FrequencySet::new(n, v.to_vec()).unwrap()
    }

    #[test]
    fn autocorrelation_small_sets() {
        let a = autocorrelation(&CoefficientSeq::<f64>::indicator(set(3, &[1, 2, 3])));
        let expect = [(0, 3.0), (1, 2.0), (-1, 2.0), (2, 1.0), (-2, 1.0)];
        for (lag, v) in expect {
            assert!((a.get(lag) - Complex64::new(v, 0.0)).norm() < 1e-14);
        }
        let single = autocorrelation(&CoefficientSeq::<f64>::indicator(set(4, &[4])));
        for (lag, v) in single.iter() {
            assert_eq!(v.re, if lag == 0 { 1.0 } else { 0.0 });
        }
        let gap = indicator_autocorrelation(&set(20, &[10, 20]));
        let at = |l: i64| gap[(l + 19) as usize];
        assert_eq!((at(0), at(10), at(-10)), (2, 1, 1));
        assert_eq!(gap.iter().sum::<u64>(), 4);
    }

    #[test]
    fn direct_and_fft_paths_agree() {
        let s = set(40, &[2, 3, 11, 17, 29, 40]);
        let vals: Vec<Complex64> = (0..6)
            .map(|i| Complex64::from_polar(0.2 + 0.1 * i as f64, 0.7 * i as f64))
            .collect();
        let c = CoefficientSeq::new(s, vals, DomainTag::LinfBall).unwrap();
        let d = autocorrelation_direct(&c);
        let f = autocorrelation_fft(&c);
        for ((_, x), (_, y)) in d.iter().zip(f.iter()) {
            assert!((x - y).norm() < 1e-10);
        }
        // hermitian and r(0) = Σ|a|²
        for (lag, v) in d.iter() {
            assert!((v - d.get(-lag).conj()).norm() < 1e-15);
        }
        assert!((d.get(0).re - c.l2_norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn even_moments_by_counting() {
        assert_eq!(dirichlet_even_moment(&set(3, &[1, 2, 3]), 2).unwrap(), 19);
        assert_eq!(dirichlet_even_moment(&set(2, &[1, 2]), 2).unwrap(), 6);
        assert_eq!(dirichlet_even_moment(&set(9, &[1, 5, 9]), 1).unwrap(), 3);
        assert_eq!(dirichlet_even_moment(&FrequencySet::empty(4), 3).unwrap(), 0);
        // {1,2}: three-fold sums 3,4,5,6 with counts 1,3,3,1
        assert_eq!(dirichlet_even_moment(&set(2, &[1, 2]), 3).unwrap(), 20);
    }

    #[test]
    fn exact_norm_rejects_odd_exponents() {
        let c = CoefficientSeq::<f64>::indicator(FrequencySet::full(4));
        assert!(lp_norm_even_exact(&c, 3.0).is_err());
        assert!(lp_norm_even_exact(&c, 4.5).is_err());
        assert!(lp_norm_even_exact(&c, 0.0).is_err());
        assert!((lp_norm_even_exact(&c, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(as_even_exponent(6.0f64), Some(3));
        assert_eq!(as_even_exponent(5.0f64), None);
    }

    #[test]
    fn complex_path_matches_integer_path() {
        let s = set(30, &[1, 4, 9, 16, 25]);
        let ones = CoefficientSeq::<f64>::indicator(s.clone())
            .with_domain(DomainTag::Unconstrained)
            .unwrap();
        let tilted: Vec<Complex64> = vec![Complex64::new(1.0, 1e-300); 5];
        let c = CoefficientSeq::new(s, tilted, DomainTag::Unconstrained).unwrap();
        for p in [4.0, 6.0, 8.0] {
            let a = lp_norm_even_exact(&ones, p).unwrap();
            let b = lp_norm_even_exact(&c, p).unwrap();
            assert!((a - b).abs() < 1e-13 * a);
        }
    }
}
