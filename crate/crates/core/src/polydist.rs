//! Distributions on `{0..M}` whose unnormalized probabilities are a
//! polynomial in the outcome, `ℙ_j = Σ_n ã_n j^n` (with `0^0 = 1`).
//!
//! [`PolyDist`] is generic over the scalar: `Rational` for exact work at small
//! `M`, `f64` for sweeps up to a few hundred thousand outcomes. In `f64` mode
//! the stored weights may be `ℙ_j` times an unknown positive constant
//! (`exp(log_scale)`), which lets families with astronomically large powers be
//! built in the log domain. Every quantity that matters here is scale free.

use std::any::Any;

use num_traits::Zero;
use serde::Serialize;

use crate::exactnum::{bernoulli, binomial, rb, ri, Rational, Scalar};
use crate::vandermonde::inverse_closed_form;
use crate::{invalid, Error, Result};

/// Relative threshold below which a float coefficient counts as zero when
/// detecting the order.
pub const REAL_ORDER_THRESHOLD: f64 = 1e-9;

/// Largest `M` accepted by the float coefficient recovery in [`PolyDist::from_probs`].
pub const REAL_FROM_PROBS_MAX_M: usize = 60;

#[derive(Clone, Debug)]
pub struct PolyDist<S: Scalar> {
    m: usize,
    coeffs: Option<Vec<S>>,
    weights: Vec<S>,
    norm: S,
    order: Option<usize>,
    lead_ratio: Option<S>,
    log_scale: f64,
}

/// Exact mode.
pub type ExactDist = PolyDist<Rational>;
/// Float mode.
pub type RealDist = PolyDist<f64>;

fn detect_order<S: Scalar>(coeffs: &[S]) -> Option<usize> {
    if S::EXACT {
        return coeffs.iter().rposition(|c| !c.is_zero());
    }
    let max = coeffs.iter().map(|c| c.to_f64_lossy().abs()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    coeffs.iter().rposition(|c| c.to_f64_lossy().abs() > REAL_ORDER_THRESHOLD * max)
}

fn lead_ratio_of<S: Scalar>(coeffs: &[S], order: Option<usize>) -> Option<S> {
    match order {
        Some(s) if s >= 1 => Some(coeffs[s - 1].clone() / coeffs[s].clone()),
        _ => None,
    }
}

fn pow_usize<S: Scalar>(base: usize, e: usize) -> S {
    if e == 0 {
        return S::one();
    }
    let b = S::from_usize(base).expect("representable");
    let mut acc = S::one();
    for _ in 0..e {
        acc = acc * b.clone();
    }
    acc
}

impl<S: Scalar> PolyDist<S> {
    /// Builds `ℙ_j = Σ_n ã_n j^n` from the `M + 1` coefficients. Rejects
    /// negative weights and an all-zero vector.
    pub fn from_coeffs(m: usize, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != m + 1 {
            return invalid(format!("expected {} coefficients, got {}", m + 1, coeffs.len()));
        }
        let nonzero: Vec<(usize, &S)> =
            coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        if nonzero.is_empty() {
            return Err(Error::InvalidDistribution("all coefficients are zero".into()));
        }
        let weights: Vec<S> = (0..=m)
            .map(|j| S::total(nonzero.iter().map(|(n, c)| (*c).clone() * pow_usize::<S>(j, *n))))
            .collect();
        let order = detect_order(&coeffs);
        let lead_ratio = lead_ratio_of(&coeffs, order);
        let mut d = Self::from_weights(m, weights)?;
        d.coeffs = Some(coeffs);
        d.order = order;
        d.lead_ratio = lead_ratio;
        Ok(d)
    }

    /// Distribution from raw non-negative weights `ℙ_0..ℙ_M`, no coefficients attached.
    pub fn from_weights(m: usize, weights: Vec<S>) -> Result<Self> {
        if weights.len() != m + 1 {
            return invalid(format!("expected {} weights, got {}", m + 1, weights.len()));
        }
        if let Some(j) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative weight at j = {j}")));
        }
        if !S::EXACT && weights.iter().any(|w| !w.to_f64_lossy().is_finite()) {
            return Err(Error::InvalidDistribution("non-finite weight".into()));
        }
        let norm = S::total(weights.iter().cloned());
        if !norm.is_positive() {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(PolyDist { m, coeffs: None, weights, norm, order: None, lead_ratio: None, log_scale: 0.0 })
    }

    /// Recovers the coefficients from `ℙ_0..ℙ_M`:
    /// `ã_0 = ℙ_0`, `ã_n = Σ_j 𝔄_{n,j} (ℙ_j - ℙ_0)/j`.
    pub fn from_probs(m: usize, probs: Vec<S>) -> Result<Self> {
        if !S::EXACT && m > REAL_FROM_PROBS_MAX_M {
            return Err(Error::TooLarge(format!(
                "float coefficient recovery limited to M <= {REAL_FROM_PROBS_MAX_M}"
            )));
        }
        let mut d = Self::from_weights(m, probs)?;
        let coeffs = coeffs_from_probs(&d.weights)?;
        d.order = detect_order(&coeffs);
        d.lead_ratio = lead_ratio_of(&coeffs, d.order);
        d.coeffs = Some(coeffs);
        Ok(d)
    }

    /// Attaches known leading-order information (order `s` and `ã_{s-1}/ã_s`)
    /// to a distribution built from weights.
    pub fn with_leading(mut self, order: usize, lead_ratio: Option<S>) -> Self {
        self.order = Some(order);
        self.lead_ratio = lead_ratio;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> Option<&[S]> {
        self.coeffs.as_deref()
    }

    /// Unnormalized probabilities (up to `exp(log_scale)` in float mode).
    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn norm(&self) -> &S {
        &self.norm
    }

    /// Order `s = max{n : ã_n ≠ 0}` when known.
    pub fn order(&self) -> Option<usize> {
        self.order
    }

    /// `ã_{s-1}/ã_s` when known and `s ≥ 1`.
    pub fn lead_ratio(&self) -> Option<&S> {
        self.lead_ratio.as_ref()
    }

    /// `ln` of the factor relating stored weights to `ℙ_j` (zero unless built in log domain).
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Normalized probability of outcome `j`.
    pub fn prob(&self, j: usize) -> S {
        self.weights[j].clone() / self.norm.clone()
    }

    pub fn probs(&self) -> Vec<S> {
        (0..=self.m).map(|j| self.prob(j)).collect()
    }

    /// `⟨j^k⟩` by direct summation.
    pub fn moment(&self, k: usize) -> S {
        let s = S::total(
            self.weights
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(j, w)| w.clone() * pow_usize::<S>(j, k)),
        );
        s / self.norm.clone()
    }

    pub fn mean(&self) -> S {
        self.moment(1)
    }

    /// `σ² = ⟨j²⟩ - ⟨j⟩²`, evaluated as `Σ (j - μ)² ℙ_j / 𝔑` (identical in
    /// exact mode, better conditioned in float mode).
    pub fn variance_exact(&self) -> S {
        let mu = self.mean();
        let s = S::total(self.weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(j, w)| {
            let d = S::from_usize(j).unwrap() - mu.clone();
            w.clone() * d.clone() * d
        }));
        s / self.norm.clone()
    }

    /// `σ²/N`.
    pub fn sample_mean_variance(&self, n: usize) -> Result<S> {
        if n == 0 {
            return invalid("sample size N must be at least 1");
        }
        Ok(self.variance_exact() / S::from_usize(n).unwrap())
    }

    /// `σ²` through the Bernoulli-weighted coefficient convolutions
    /// ([`beta_coefficients`]). Exact mode only.
    pub fn variance_beta(&self) -> Result<Rational> {
        let coeffs = self
            .coeffs
            .as_ref()
            .ok_or_else(|| Error::Mode("coefficients unknown".into()))?;
        let exact = (coeffs as &dyn Any)
            .downcast_ref::<Vec<Rational>>()
            .ok_or_else(|| Error::Mode("variance_beta needs exact coefficients".into()))?;
        variance_from_betas(exact, self.m)
    }
}

impl RealDist {
    /// Float distribution from `ln ℙ_j` (use `-inf` for zero weight). Weights are
    /// stored relative to the largest term.
    pub fn from_log_weights(m: usize, log_weights: &[f64]) -> Result<Self> {
        if log_weights.len() != m + 1 {
            return invalid(format!("expected {} log-weights, got {}", m + 1, log_weights.len()));
        }
        if log_weights.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::InvalidDistribution("NaN or +inf log-weight".into()));
        }
        let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        let weights = log_weights.iter().map(|l| (l - max).exp()).collect();
        let mut d = Self::from_weights(m, weights)?;
        d.log_scale = max;
        Ok(d)
    }

    /// Attaches float coefficients without re-evaluating weights (used when
    /// the weights were built in the log domain from the same coefficients).
    pub fn with_coeffs(mut self, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != self.m + 1 {
            return invalid("coefficient count must be M + 1");
        }
        self.order = detect_order(&coeffs);
        self.lead_ratio = lead_ratio_of(&coeffs, self.order);
        self.coeffs = Some(coeffs);
        Ok(self)
    }
}

impl ExactDist {
    /// Float copy of an exact distribution.
    pub fn to_real(&self) -> RealDist {
        let conv = |v: &Rational| crate::exactnum::rational_to_f64(v);
        PolyDist {
            m: self.m,
            coeffs: self.coeffs.as_ref().map(|c| c.iter().map(conv).collect()),
            weights: self.weights.iter().map(conv).collect(),
            norm: conv(&self.norm),
            order: self.order,
            lead_ratio: self.lead_ratio.as_ref().map(conv),
            log_scale: 0.0,
        }
    }
}

/// Coefficients `ã_0..ã_M` from `ℙ_0..ℙ_M` through the closed-form inverse.
pub fn coeffs_from_probs<S: Scalar>(probs: &[S]) -> Result<Vec<S>> {
    let m = probs.len().checked_sub(1).ok_or_else(|| Error::InvalidArgument("empty".into()))?;
    let mut out = vec![probs[0].clone()];
    if m == 0 {
        return Ok(out);
    }
    let inv = inverse_closed_form(m)?;
    let reduced: Vec<S> = (1..=m)
        .map(|j| (probs[j].clone() - probs[0].clone()) / S::from_usize(j).unwrap())
        .collect();
    for n in 1..=m {
        let terms = (1..=m).map(|j| S::from_rational(inv.get(n, j)) * reduced[j - 1].clone());
        out.push(S::total(terms));
    }
    Ok(out)
}

/// Coefficients `β⁽¹⁾_n` (numerator, `n ≤ 2M+4`) and `β⁽²⁾_n` (denominator,
/// `n ≤ 2M+2`) of `σ² = Σ β⁽¹⁾_n (M+1)^n / Σ β⁽²⁾_n (M+1)^n`, accumulated
/// over `(n₁, n₂, k₁, k₂)` with Faulhaber weights `C(n+1, k) B_k / (n+1)`.
pub fn beta_coefficients(coeffs: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let m = coeffs.len() - 1;
    // w[n][k] = C(n+1, k) B_k / (n+1) for n = 0..m+2
    let w: Vec<Vec<Rational>> = (0..=m + 2)
        .map(|n| {
            (0..=n + 1)
                .map(|k| {
                    if k > n {
                        Rational::zero()
                    } else {
                        rb(binomial(n + 1, k)) * bernoulli(k) / ri((n + 1) as i64)
                    }
                })
                .collect()
        })
        .collect();
    let mut b1 = vec![Rational::zero(); 2 * m + 5];
    let mut b2 = vec![Rational::zero(); 2 * m + 3];
    let nz: Vec<usize> = (0..=m).filter(|&n| !coeffs[n].is_zero()).collect();
    for &n1 in &nz {
        for &n2 in &nz {
            let aa = &coeffs[n1] * &coeffs[n2];
            for k1 in 0..=n1 + 2 {
                for k2 in 0..=n2 + 3 {
                    // numerator: F_{n1} F_{n2+2} - F_{n1+1} F_{n2+1}
                    let mut t = Rational::zero();
                    if k1 <= n1 && k2 <= n2 + 2 {
                        t += &w[n1][k1] * &w[n2 + 2][k2];
                    }
                    if k1 <= n1 + 1 && k2 <= n2 + 1 {
                        t -= &w[n1 + 1][k1] * &w[n2 + 1][k2];
                    }
                    if !t.is_zero() {
                        b1[n1 + n2 + 4 - k1 - k2] += &aa * t;
                    }
                    if k1 <= n1 && k2 <= n2 {
                        b2[n1 + n2 + 2 - k1 - k2] += &aa * &w[n1][k1] * &w[n2][k2];
                    }
                }
            }
        }
    }
    (b1, b2)
}

fn variance_from_betas(coeffs: &[Rational], m: usize) -> Result<Rational> {
    let (b1, b2) = beta_coefficients(coeffs);
    let x = ri(m as i64 + 1);
    let eval = |b: &[Rational]| b.iter().rev().fold(Rational::zero(), |acc, c| acc * &x + c);
    let den = eval(&b2);
    if den.is_zero() {
        return Err(Error::InvalidDistribution("zero norm".into()));
    }
    Ok(eval(&b1) / den)
}

/// The short leading-order forms `(β⁽¹⁾_{2s+4}, β⁽¹⁾_{2s+3}, β⁽²⁾_{2s+2}, β⁽²⁾_{2s+1})`
/// for a distribution of order `s ≥ 1` with `ã_s` and `ã_{s-1}`.
pub fn leading_betas(s: usize, a_s: &Rational, a_s1: &Rational) -> [Rational; 4] {
    let s = s as i64;
    let sq = a_s * a_s;
    [
        &sq / ri((s + 1) * (s + 3) * (s + 2) * (s + 2)),
        ri(2) * a_s1 * a_s / ri(s * (s + 1) * (s + 2) * (s + 3)) - &sq / ri((s + 1) * (s + 2) * (s + 3)),
        &sq / ri((s + 1) * (s + 1)),
        ri(2) * a_s1 * a_s / ri(s * (s + 1)) - &sq / ri(s + 1),
    ]
}

/// Large-`M` variance for order `s` and `ratio = ã_{s-1}/ã_s`:
/// `((s+1)/((s+3)(s+2)²)) · [M² + 2M·ratio/s + M + 2·ratio/s]`.
pub fn variance_asymptotic(s: f64, ratio: f64, m: f64) -> Result<f64> {
    if s <= 0.0 {
        return invalid("order s must be positive; use variance_exact for s = 0");
    }
    if m < 1.0 {
        return invalid("M must be at least 1");
    }
    let pre = (s + 1.0) / ((s + 3.0) * (s + 2.0) * (s + 2.0));
    Ok(pre * (m * m + 2.0 * m * ratio / s + m + 2.0 * ratio / s))
}

/// Outcome of [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DivergenceCase {
    /// `(ã_{s-1}/ã_s)/s` stays bounded.
    Case1,
    /// It diverges, but slower than `M/2`.
    Case2,
    /// It diverges to `+∞` at least like `M/2`.
    Case3,
    /// It diverges to `-∞` at least like `M/2`.
    Case4,
    /// Every grid point has order zero, the ratio does not exist.
    ConstantOrderZero,
}

/// Classifier output.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub case_label: DivergenceCase,
    pub grid: Vec<usize>,
    pub orders: Vec<usize>,
    /// `r(M) = (ã_{s-1}/ã_s)/s` per grid point.
    pub ratio_sequence: Vec<f64>,
    pub variances: Vec<f64>,
    /// Slope of `ln σ²` against `ln M`; also the exponent of `σ²/N`.
    pub predicted_exponent: f64,
}

/// `|r(M_max)| ≤ BOUNDED_FACTOR · median |r|` counts as bounded.
pub const BOUNDED_FACTOR: f64 = 8.0;
/// `2|r(M)|/M ≥ FAST_THRESHOLD` at the largest grid point counts as "at least like M²".
pub const FAST_THRESHOLD: f64 = 0.5;

/// Labels a family by the growth of `r(M) = (ã_{s-1}/ã_s)/s` over `grid` and
/// fits the variance exponent. The thresholds [`BOUNDED_FACTOR`] and
/// [`FAST_THRESHOLD`] are heuristics standing in for limits.
pub fn classify<S, F>(family: F, grid: &[usize]) -> Result<DivergenceReport>
where
    S: Scalar,
    F: Fn(usize) -> Result<PolyDist<S>> + Sync,
{
    use rayon::prelude::*;
    if grid.len() < 4 {
        return invalid("classify needs at least 4 grid points");
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("grid must be strictly increasing");
    }
    let points: Vec<(usize, Option<f64>, f64)> = grid
        .par_iter()
        .map(|&m| {
            let d = family(m)?;
            let s = d.order().ok_or_else(|| {
                Error::InvalidArgument(format!("order unknown for the family at M = {m}"))
            })?;
            let r = if s == 0 {
                None
            } else {
                let ratio = d.lead_ratio().ok_or_else(|| {
                    Error::InvalidArgument(format!("leading ratio unknown at M = {m}"))
                })?;
                Some(ratio.to_f64_lossy() / s as f64)
            };
            Ok((s, r, d.variance_exact().to_f64_lossy()))
        })
        .collect::<Result<_>>()?;

    let orders: Vec<usize> = points.iter().map(|p| p.0).collect();
    let variances: Vec<f64> = points.iter().map(|p| p.2).collect();
    let xs: Vec<f64> = grid.iter().map(|&m| (m as f64).ln()).collect();
    let predicted_exponent = if variances.iter().all(|v| *v > 0.0) {
        let ys: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
        linear_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    if orders.iter().all(|&s| s == 0) {
        return Ok(DivergenceReport {
            case_label: DivergenceCase::ConstantOrderZero,
            grid: grid.to_vec(),
            orders,
            ratio_sequence: vec![f64::NAN; grid.len()],
            variances,
            predicted_exponent,
        });
    }
    if points.iter().any(|p| p.1.is_none()) {
        return invalid("order drops to zero on part of the grid");
    }
    let r: Vec<f64> = points.iter().map(|p| p.1.unwrap()).collect();
    let m_max = *grid.last().unwrap() as f64;
    let r_last = *r.last().unwrap();
    let mut abs: Vec<f64> = r.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if abs.len() % 2 == 1 {
        abs[abs.len() / 2]
    } else {
        0.5 * (abs[abs.len() / 2 - 1] + abs[abs.len() / 2])
    };
    let growing = r_last.abs() > r[0].abs();
    let case_label = if growing && 2.0 * r_last.abs() / m_max >= FAST_THRESHOLD {
        if r_last > 0.0 { DivergenceCase::Case3 } else { DivergenceCase::Case4 }
    } else if r_last.abs() <= BOUNDED_FACTOR * median {
        DivergenceCase::Case1
    } else {
        DivergenceCase::Case2
    };
    Ok(DivergenceReport {
        case_label,
        grid: grid.to_vec(),
        orders,
        ratio_sequence: r,
        variances,
        predicted_exponent,
    })
}

pub(crate) fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Variance functional `Σ(j-μ)² w_j / Σ w_j` for a possibly signed weight
/// vector. Used on solver output that is not a genuine distribution.
pub fn signed_variance(weights: &[Rational]) -> Result<Rational> {
    let norm: Rational = weights.iter().sum();
    if norm.is_zero() {
        return Err(Error::InvalidDistribution("weights sum to zero".into()));
    }
    let m1: Rational = weights.iter().enumerate().map(|(j, w)| w * ri(j as i64)).sum::<Rational>() / &norm;
    let m2: Rational =
        weights.iter().enumerate().map(|(j, w)| w * ri((j * j) as i64)).sum::<Rational>() / &norm;
    Ok(m2 - &m1 * &m1)
}

/// Exact `⟨j⟩` for `ℙ_j = j^s` on `{0..M}`: `S_{s+1}(M)/S_s(M)`.
pub fn power_law_mean_exact(m: u64, s: usize) -> Rational {
    crate::exactnum::power_sum(m, s + 1) / crate::exactnum::power_sum(m, s)
}
