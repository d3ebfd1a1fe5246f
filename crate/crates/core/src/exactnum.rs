//! Exact rational substrate: Bernoulli numbers, Faulhaber power sums,
//! memoized factorials and a small dense polynomial type over the rationals.
//!
//! Conventions used everywhere in the crate:
//!
//! * `B_1 = -1/2`. With this sign Faulhaber's expansion in powers of `(M+1)`
//!   reproduces `Σ_{j=0}^{M} j^n`.
//! * `0^0 = 1`, so `Σ_{j=0}^{M} j^0 = M + 1`.

use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;
/// Arbitrary-precision integer.
pub type Integer = BigInt;

/// `n / d` as a [`Rational`]. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a [`Rational`].
pub fn ri(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Big integer as a [`Rational`].
pub fn rb(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Serializes as `"num/den"` (denominator always written).
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| ParseRationalError(s.to_string()))?;
    let d: BigInt = d.parse().map_err(|_| ParseRationalError(s.to_string()))?;
    if d.is_zero() {
        return Err(ParseRationalError(s.to_string()));
    }
    Ok(Rational::new(n, d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRationalError(pub String);

/// `base^e` over the integers.
pub fn ipow(base: i64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), e as usize)
}

/// `base^e` over the rationals, negative exponents allowed for non-zero bases.
pub fn rpow(base: &Rational, e: i32) -> Rational {
    if e >= 0 {
        num_traits::pow(base.clone(), e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

fn factorial_cache() -> &'static RwLock<Vec<BigInt>> {
    static CACHE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![BigInt::one()]))
}

/// `n!`, memoized.
pub fn factorial(n: usize) -> BigInt {
    if let Some(v) = factorial_cache().read().unwrap().get(n) {
        return v.clone();
    }
    let mut cache = factorial_cache().write().unwrap();
    while cache.len() <= n {
        let k = cache.len();
        let next = &cache[k - 1] * BigInt::from(k);
        cache.push(next);
    }
    cache[n].clone()
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

/// Binomial coefficient with signed arguments; zero outside `0 ≤ k ≤ n`.
pub fn binomial_i(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        BigInt::zero()
    } else {
        binomial(n as usize, k as usize)
    }
}

/// Double factorial `n!!` for `n ≥ -1`, with `(-1)!! = 0!! = 1`. `None` below `-1`.
pub fn double_factorial(n: i64) -> Option<BigInt> {
    if n < -1 {
        return None;
    }
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    Some(acc)
}

/// Multinomial coefficient `(Σ parts)! / Π parts!`.
pub fn multinomial(parts: &[usize]) -> BigInt {
    let total: usize = parts.iter().sum();
    let mut acc = factorial(total);
    for &p in parts {
        acc /= factorial(p);
    }
    acc
}

fn bernoulli_cache() -> &'static RwLock<Vec<Rational>> {
    static CACHE: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![Rational::one()]))
}

/// Bernoulli number `B_k` with `B_1 = -1/2`.
///
/// Computed from `Σ_{j=0}^{k} C(k+1, j) B_j = 0` and cached; the cache
/// tolerates concurrent readers and racing writers (the later writer simply
/// finds the entries already present).
pub fn bernoulli(k: usize) -> Rational {
    if let Some(b) = bernoulli_cache().read().unwrap().get(k) {
        return b.clone();
    }
    let mut cache = bernoulli_cache().write().unwrap();
    while cache.len() <= k {
        let n = cache.len();
        let mut acc = Rational::zero();
        for (j, bj) in cache.iter().enumerate() {
            if j > 1 && j % 2 == 1 {
                continue;
            }
            acc += rb(binomial(n + 1, j)) * bj;
        }
        let next = -acc / rb(BigInt::from(n + 1));
        cache.push(next);
    }
    cache[k].clone()
}

/// `Σ_{j=0}^{M} j^n` through Faulhaber's expansion in powers of `M + 1`.
pub fn power_sum(m: u64, n: usize) -> Rational {
    let x = rb(BigInt::from(m) + 1);
    faulhaber_poly(n).eval(&x)
}

/// `Σ_{j=0}^{M} j^n` by direct summation (test oracle).
pub fn power_sum_brute(m: u64, n: usize) -> Rational {
    let mut acc = BigInt::zero();
    for j in 0..=m {
        acc += num_traits::pow(BigInt::from(j), n);
    }
    rb(acc)
}

/// Faulhaber polynomial `F_n(x) = Σ_k C(n+1, k) B_k / (n+1) · x^{n+1-k}`,
/// so that `F_n(M + 1) = Σ_{j=0}^{M} j^n`. Equivalently `F_n(t) = Σ_{j=0}^{t-1} j^n`.
pub fn faulhaber_poly(n: usize) -> RatPoly {
    let mut c = vec![Rational::zero(); n + 2];
    let inv = rat(1, (n + 1) as i64);
    for k in 0..=n {
        c[n + 1 - k] = rb(binomial(n + 1, k)) * bernoulli(k) * &inv;
    }
    RatPoly::new(c)
}

/// Dense univariate polynomial over the rationals, coefficient `i` multiplies `x^i`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        RatPoly::new(vec![c])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Rational::zero(); k + 1];
        c[k] = Rational::one();
        RatPoly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        RatPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, k: &Rational) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut c = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RatPoly::new(c)
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> RatPoly {
        if self.is_zero() {
            return RatPoly::zero();
        }
        let mut c = vec![Rational::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        RatPoly { coeffs: c }
    }

    /// The polynomial `t ↦ Σ_{j=0}^{t-1} p(j)`, obtained term by term from Faulhaber.
    pub fn sum_below(&self) -> RatPoly {
        let mut acc = RatPoly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&faulhaber_poly(k).scale(c));
            }
        }
        acc
    }

    /// Lagrange interpolation through `(x_i, y_i)` with distinct `x_i`.
    pub fn interpolate(points: &[(Rational, Rational)]) -> RatPoly {
        let mut acc = RatPoly::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            let mut basis = RatPoly::constant(yi.clone());
            for (j, (xj, _)) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let den = (xi - xj).recip();
                let lin = RatPoly::new(vec![-xj * &den, den]);
                basis = basis.mul(&lin);
            }
            acc = acc.add(&basis);
        }
        acc
    }
}

impl fmt::Debug for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c})x^{k}"))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Scalar field used by the dual-mode distribution code: exact [`Rational`]
/// or compensated `f64`.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + num_traits::Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + 'static
{
    /// True for exact arithmetic.
    const EXACT: bool;

    /// Sum of a sequence; Neumaier-compensated for floats.
    fn total<I: IntoIterator<Item = Self>>(items: I) -> Self;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn total<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items.into_iter().fold(Rational::zero(), |a, b| a + b)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn total<I: IntoIterator<Item = Self>>(items: I) -> Self {
        neumaier_sum(items)
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
}

/// Neumaier (improved Kahan–Babuška) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(items: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Correctly scaled conversion that survives numerators and denominators far
/// beyond the `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // keep ~60 significant bits of each before dividing
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (r.numer().abs() >> shift_n as usize).to_f64().unwrap();
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap();
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

/// Natural log of `|r|` without overflow; `-inf` for zero.
pub fn rational_ln_abs(r: &Rational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    big_ln(&r.numer().abs()) - big_ln(r.denom())
}

/// Natural log of a positive big integer.
pub fn big_ln(n: &BigInt) -> f64 {
    let bits = n.bits() as i64;
    let shift = (bits - 60).max(0);
    let top = (n >> shift as usize).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `lcm` of the denominators of a slice of rationals.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> BigInt {
    items
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), ri(1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), ri(0));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(12), rat(-691, 2730));
        for k in 1..20 {
            assert!(bernoulli(2 * k + 1).is_zero());
        }
    }

    #[test]
    fn power_sum_small() {
        assert_eq!(power_sum(10, 1), ri(55));
        assert_eq!(power_sum(10, 0), ri(11));
        assert_eq!(power_sum(10, 2), ri(385));
        assert_eq!(power_sum(0, 0), ri(1));
        assert_eq!(power_sum_brute(0, 5), ri(0));
        assert_eq!(power_sum_brute(3, 3), ri(36));
    }

    #[test]
    fn power_sum_grid() {
        for m in 0..=200u64 {
            for n in 0..=20 {
                assert_eq!(power_sum(m, n), power_sum_brute(m, n), "M={m} n={n}");
            }
        }
    }

    #[test]
    fn rational_roundtrip() {
        let r = rat(3, 4) + rat(5, 6);
        assert_eq!(fmt_rational(&r), "19/12");
        assert_eq!(parse_rational("19/12").unwrap(), r);
        assert_eq!(parse_rational("-7").unwrap(), ri(-7));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), Some(BigInt::one()));
        assert_eq!(double_factorial(0), Some(BigInt::one()));
        assert_eq!(double_factorial(7), Some(BigInt::from(105)));
        assert_eq!(double_factorial(8), Some(BigInt::from(384)));
        assert_eq!(double_factorial(-2), None);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = rb(factorial(400)) / rb(factorial(398));
        assert!((rational_to_f64(&big) - 400.0 * 399.0).abs() < 1e-6);
        let tiny = rb(factorial(398)) / rb(factorial(400));
        assert!((rational_to_f64(&tiny) * 400.0 * 399.0 - 1.0).abs() < 1e-12);
        assert!((rational_ln_abs(&rb(factorial(300))) - 1414.905_849_89).abs() < 1e-6);
    }

    #[test]
    fn sum_below_matches_brute() {
        let p = RatPoly::new(vec![ri(1), ri(-2), ri(3)]);
        let s = p.sum_below();
        for t in 0..10i64 {
            let brute: Rational = (0..t).map(|j| p.eval(&ri(j))).fold(ri(0), |a, b| a + b);
            assert_eq!(s.eval(&ri(t)), brute);
        }
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = RatPoly::new(vec![rat(1, 3), ri(0), rat(-5, 7), ri(2)]);
        let pts: Vec<_> = (0..4).map(|x| (ri(x), p.eval(&ri(x)))).collect();
        assert_eq!(RatPoly::interpolate(&pts), p);
    }
}
