//! Distribution of `Z = S_N/N - μ` where `S_N` is the sum of `N` draws.
//!
//! [`convolve_pmf`] gives the exact pmf of `S_N`; [`cdf_exact`] and
//! [`percentile`] read tail probabilities off it. [`cdf_paper_approx`] is the
//! large-`M` expression built from autoconvolutions of the coefficients; it
//! neglects boundary indicators and replaces simplex sums by their leading
//! term, so it is a diagnostic, not an estimate with a guaranteed error.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::exactnum::{binomial, factorial, rational_to_f64, rb, ri, Rational, Scalar};
use crate::polydist::{ExactDist, PolyDist};
use crate::{invalid, Error, Result};

/// Largest `N·M` for float convolution.
pub const REAL_SUPPORT_CAP: usize = 1_000_000;
/// Largest `N·M` for exact convolution.
pub const EXACT_SUPPORT_CAP: usize = 10_000;

/// Exact pmf of `S_N` on `{0..N·M}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSumPmf<S: Scalar> {
    pub n: usize,
    pub probs: Vec<S>,
}

impl<S: Scalar> SampleSumPmf<S> {
    pub fn mean(&self) -> S {
        S::total(self.probs.iter().enumerate().map(|(l, p)| p.clone() * S::from_usize(l).unwrap()))
    }

    pub fn variance(&self) -> S {
        let mu = self.mean();
        S::total(self.probs.iter().enumerate().map(|(l, p)| {
            let d = S::from_usize(l).unwrap() - mu.clone();
            p.clone() * d.clone() * d
        }))
    }

    /// `P(S_N > l)`.
    pub fn tail_above(&self, l: usize) -> S {
        S::total(self.probs.iter().skip(l + 1).cloned())
    }
}

/// Iterated pairwise convolution of the normalized pmf.
pub fn convolve_pmf<S: Scalar>(dist: &PolyDist<S>, n: usize) -> Result<SampleSumPmf<S>> {
    if n == 0 {
        return invalid("sample size N must be at least 1");
    }
    let m = dist.m();
    let cap = if S::EXACT { EXACT_SUPPORT_CAP } else { REAL_SUPPORT_CAP };
    if n.saturating_mul(m) > cap {
        return Err(Error::TooLarge(format!("N*M = {} exceeds {cap}", n * m)));
    }
    let base = dist.probs();
    let mut acc = base.clone();
    for _ in 1..n {
        let mut next = vec![S::zero(); acc.len() + m];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in base.iter().enumerate() {
                if !b.is_zero() {
                    next[i + j] = next[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        acc = next;
    }
    Ok(SampleSumPmf { n, probs: acc })
}

/// `P(Z > z) = Σ_{l > (z+μ)N} P(S_N = l)`, strict inequality.
pub fn cdf_exact<S: Scalar>(pmf: &SampleSumPmf<S>, mu: &S, z: &S) -> S {
    let t = (z.clone() + mu.clone()) * S::from_usize(pmf.n).unwrap();
    // first l with l > t
    let (mut lo, mut hi) = (0usize, pmf.probs.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if S::from_usize(mid).unwrap() > t {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let first = lo;
    S::total(pmf.probs.iter().skip(first).cloned())
}

/// Smallest lattice value `z = l/N - μ` with `P(Z > z) ≤ p/100`.
pub fn percentile(pmf: &SampleSumPmf<f64>, mu: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 100.0) {
        return invalid("percentile needs 0 < p < 100");
    }
    let target = p / 100.0;
    // suffix sums: tail[l] = P(S > l)
    let len = pmf.probs.len();
    let mut tail = vec![0.0; len];
    let mut acc = 0.0;
    for l in (0..len).rev() {
        tail[l] = acc;
        acc += pmf.probs[l];
    }
    let l = (0..len).find(|&l| tail[l] <= target).unwrap_or(len - 1);
    Ok(l as f64 / pmf.n as f64 - mu)
}

/// `a_n = ã_n · n!`.
pub fn factorial_coeffs(coeffs: &[Rational]) -> Vec<Rational> {
    coeffs.iter().enumerate().map(|(n, c)| c * rb(factorial(n))).collect()
}

fn poly_power(a: &[Rational], n: usize) -> Vec<Rational> {
    let mut acc = vec![ri(1)];
    for _ in 0..n {
        let mut next = vec![Rational::zero(); acc.len() + a.len() - 1];
        for (i, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in a.iter().enumerate() {
                if !y.is_zero() {
                    next[i + j] += x * y;
                }
            }
        }
        acc = next;
    }
    acc
}

/// `a^{⊗N}_p = [x^p](Σ a_n x^n)^N / C(N-1+p, p)` for the sequence `a` given directly.
pub fn autoconvolution(a: &[Rational], n: usize, p: usize) -> Result<Rational> {
    if n == 0 || a.is_empty() {
        return invalid("need N >= 1 and a non-empty sequence");
    }
    let m = a.len() - 1;
    if p > n * m {
        return invalid(format!("p = {p} exceeds N*M = {}", n * m));
    }
    let pw = poly_power(a, n);
    Ok(&pw[p] / rb(binomial(n - 1 + p, p)))
}

/// Composition enumerator for [`autoconvolution`] (test oracle).
pub fn autoconvolution_brute(a: &[Rational], n: usize, p: usize) -> Rational {
    fn rec(a: &[Rational], left: usize, rem: usize) -> Rational {
        if left == 0 {
            return if rem == 0 { ri(1) } else { Rational::zero() };
        }
        (0..a.len().min(rem + 1)).map(|k| &a[k] * rec(a, left - 1, rem - k)).sum()
    }
    rec(a, n, p) / rb(binomial(n - 1 + p, p))
}

/// The approximate tail
/// `(1/𝔑^N) Σ_{l=⌈(z+μ)N⌉}^{MN} l^{N-1}/(N-1)! Σ_p l^p/p! · a^{⊗N}_p`,
/// with `a_n = ã_n n!`, evaluated exactly and returned as `f64`.
pub fn cdf_paper_approx(dist: &ExactDist, n: usize, z: f64) -> Result<f64> {
    if n == 0 {
        return invalid("sample size N must be at least 1");
    }
    let coeffs = dist.coeffs().ok_or_else(|| Error::Mode("coefficients unknown".into()))?;
    let m = dist.m();
    if n * m > 400 {
        return Err(Error::TooLarge("approximate CDF limited to N*M <= 400".into()));
    }
    let mu = rational_to_f64(&dist.mean());
    let start = ((z + mu) * n as f64).ceil();
    if !start.is_finite() {
        return invalid("non-finite z");
    }
    let start = start.max(0.0).to_usize().unwrap_or(usize::MAX);
    let top = n * m;
    if start > top {
        return Ok(0.0);
    }
    // Σ_{|n|=p} Π a = [x^p] A(x)^N; term_p(l) = l^{p+N-1}/(p+N-1)! · that
    let pw = poly_power(&factorial_coeffs(coeffs), n);
    let denoms: Vec<BigInt> = (0..pw.len()).map(|p| factorial(p + n - 1)).collect();
    let mut total = Rational::zero();
    for l in start..=top {
        let lb = BigInt::from(l);
        let mut lp = lb.pow((n - 1) as u32);
        for (p, c) in pw.iter().enumerate() {
            if !c.is_zero() {
                total += c * Rational::new(lp.clone(), denoms[p].clone());
            }
            lp *= &lb;
        }
    }
    let norm_n = crate::exactnum::rpow(dist.norm(), n as i32);
    Ok(rational_to_f64(&(total / norm_n)))
}

/// One row of a CDF comparison grid.
#[derive(Clone, Debug, Serialize)]
pub struct CdfRow {
    pub z: f64,
    pub exact: f64,
    pub approx: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn uniform(m: usize) -> ExactDist {
        ExactDist::from_weights(m, vec![ri(1); m + 1]).unwrap()
    }

    #[test]
    fn bernoulli_pair() {
        let p = convolve_pmf(&uniform(1), 2).unwrap();
        assert_eq!(p.probs, vec![rat(1, 4), rat(1, 2), rat(1, 4)]);
        let one = convolve_pmf(&uniform(3), 1).unwrap();
        assert_eq!(one.probs, uniform(3).probs());
    }

    #[test]
    fn three_dice_enumeration() {
        let p = convolve_pmf(&uniform(2), 3).unwrap();
        let mut counts = [0i64; 7];
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    counts[a + b + c] += 1;
                }
            }
        }
        let expect: Vec<Rational> = counts.iter().map(|&c| rat(c, 27)).collect();
        assert_eq!(p.probs, expect);
    }

    #[test]
    fn cdf_examples() {
        let d = uniform(2);
        let p = convolve_pmf(&d, 2).unwrap();
        let mu = d.mean();
        assert_eq!(cdf_exact(&p, &mu, &ri(0)), rat(1, 3));
        assert_eq!(cdf_exact(&p, &mu, &(ri(2) - &mu)), ri(0));
        assert_eq!(cdf_exact(&p, &mu, &(-&mu - rat(1, 10))), ri(1));
    }

    #[test]
    fn percentile_basics() {
        let d = uniform(2).to_real();
        let p = convolve_pmf(&d, 2).unwrap();
        let z = percentile(&p, 1.0, 100.0 / 3.0 + 1e-9).unwrap();
        assert_eq!(z, 0.0);
        let z50 = percentile(&convolve_pmf(&uniform(6).to_real(), 3).unwrap(), 3.0, 50.0).unwrap();
        assert!(z50.abs() <= 1.0 / 3.0 + 1e-12);
        let atom = ExactDist::from_weights(4, vec![ri(0), ri(0), ri(1), ri(0), ri(0)]).unwrap().to_real();
        let pa = convolve_pmf(&atom, 3).unwrap();
        for p in [5.0, 50.0, 95.0] {
            assert_eq!(percentile(&pa, 2.0, p).unwrap(), 0.0);
        }
        assert!(percentile(&pa, 2.0, 100.0).is_err());
    }

    #[test]
    fn autoconvolution_small() {
        let a = vec![rat(1, 2), rat(-3, 4), rat(5, 3)];
        for p in 0..=4 {
            assert_eq!(autoconvolution(&a, 2, p).unwrap(), autoconvolution_brute(&a, 2, p));
        }
        for p in 0..=2 {
            assert_eq!(autoconvolution(&a, 1, p).unwrap(), a[p]);
        }
        assert_eq!(autoconvolution(&[ri(1), ri(0), ri(0)], 5, 0).unwrap(), ri(1));
    }

    #[test]
    fn approx_is_monotone_and_finite() {
        let mut c = vec![ri(0); 11];
        c[0] = ri(1);
        let d = ExactDist::from_coeffs(10, c).unwrap();
        let mut prev = f64::INFINITY;
        for k in -10..=10 {
            let v = cdf_paper_approx(&d, 2, k as f64 / 2.0).unwrap();
            assert!(v.is_finite() && v <= prev + 1e-15);
            prev = v;
        }
        assert_eq!(cdf_paper_approx(&d, 2, 100.0).unwrap(), 0.0);
    }
}
