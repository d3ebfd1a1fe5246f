//! Named families: `j^s`, `j^{round(γ√M)}`, `e^{-jα}`, the `j^{M²}`
//! counterexample and its `j^{M^x}` generalisation.
//!
//! Large-`M` families are built in the log domain so that `M = 5·10⁵` with
//! `s ≈ 700` stays finite.

use serde::{Deserialize, Serialize};

use crate::exactnum::{ri, Rational};
use crate::polydist::{ExactDist, RealDist};
use crate::{invalid, Error, Result};

/// A family indexed by `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilySpec {
    PowerLaw { s: usize },
    SqrtPower { gamma: f64 },
    Exponential { alpha: f64 },
    CounterExample,
    /// `ℙ_j = j^{M^x}`.
    GeneralizedCounter { x: f64 },
    /// Fixed coefficients `ã_0..ã_M`; only valid for `M = len - 1`.
    CustomCoeffs(Vec<f64>),
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::PowerLaw { s } if *s == 0 => invalid("power law needs s >= 1"),
            FamilySpec::SqrtPower { gamma } if !(*gamma > 0.0 && gamma.is_finite()) => {
                invalid("gamma must be positive")
            }
            FamilySpec::Exponential { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => {
                invalid("alpha must be positive")
            }
            FamilySpec::GeneralizedCounter { x } if !x.is_finite() => invalid("x must be finite"),
            FamilySpec::CustomCoeffs(c) if c.is_empty() => invalid("no coefficients"),
            _ => Ok(()),
        }
    }

    /// The member with `M` outcomes beyond zero.
    pub fn build(&self, m: usize) -> Result<RealDist> {
        self.validate()?;
        match self {
            FamilySpec::PowerLaw { s } => power_law(m, *s),
            FamilySpec::SqrtPower { gamma } => sqrt_power(m, *gamma),
            FamilySpec::Exponential { alpha } => exponential(m, *alpha),
            FamilySpec::CounterExample => counterexample(m),
            FamilySpec::GeneralizedCounter { x } => generalized_counterexample(m, *x),
            FamilySpec::CustomCoeffs(c) => {
                if c.len() != m + 1 {
                    return invalid(format!("custom coefficients fix M = {}", c.len() - 1));
                }
                RealDist::from_coeffs(m, c.clone())
            }
        }
    }

    /// Short label used in file names and CSV headers.
    pub fn label(&self) -> String {
        match self {
            FamilySpec::PowerLaw { s } => format!("power_s{s}"),
            FamilySpec::SqrtPower { gamma } => format!("sqrt_g{gamma}"),
            FamilySpec::Exponential { alpha } => format!("exp_a{alpha}"),
            FamilySpec::CounterExample => "counter".into(),
            FamilySpec::GeneralizedCounter { x } => format!("counter_x{x}"),
            FamilySpec::CustomCoeffs(c) => format!("custom_m{}", c.len() - 1),
        }
    }
}

fn log_power_weights(m: usize, e: f64) -> Vec<f64> {
    (0..=m)
        .map(|j| if j == 0 { f64::NEG_INFINITY } else { e * (j as f64).ln() })
        .collect()
}

/// `ℙ_j = j^s` (`ã_s = 1`).
pub fn power_law(m: usize, s: usize) -> Result<RealDist> {
    if s == 0 || s > m {
        return invalid(format!("power law needs 1 <= s <= M, got s = {s}, M = {m}"));
    }
    let mut c = vec![0.0; m + 1];
    c[s] = 1.0;
    RealDist::from_log_weights(m, &log_power_weights(m, s as f64))?.with_coeffs(c)
}

/// Exact-mode `ℙ_j = j^s`.
pub fn power_law_exact(m: usize, s: usize) -> Result<ExactDist> {
    if s == 0 || s > m {
        return invalid(format!("power law needs 1 <= s <= M, got s = {s}, M = {m}"));
    }
    let mut c = vec![ri(0); m + 1];
    c[s] = ri(1);
    ExactDist::from_coeffs(m, c)
}

/// `s* = round(γ√M)`, ties up.
pub fn sqrt_power_order(m: usize, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0) {
        return invalid("gamma must be positive");
    }
    let s = (gamma * (m as f64).sqrt() + 0.5).floor();
    if s < 1.0 || s > m as f64 {
        return invalid(format!("round(gamma*sqrt(M)) = {s} outside [1, {m}]"));
    }
    Ok(s as usize)
}

/// `ℙ_j = j^{s*}` with `s* = round(γ√M)`.
pub fn sqrt_power(m: usize, gamma: f64) -> Result<RealDist> {
    power_law(m, sqrt_power_order(m, gamma)?)
}

/// `ℙ_j = e^{-jα}`. Coefficients are not attached; see [`exponential_coeff_view`].
pub fn exponential(m: usize, alpha: f64) -> Result<RealDist> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return invalid("alpha must be positive");
    }
    let lw: Vec<f64> = (0..=m).map(|j| -(j as f64) * alpha).collect();
    RealDist::from_log_weights(m, &lw)
}

/// Largest `M` for which [`exponential_coeff_view`] is offered.
pub const EXP_COEFF_VIEW_MAX_M: usize = 20;

/// Truncated Taylor coefficients `ã_n = (-α)ⁿ/n!`, `n = 0..M`. This is an
/// approximation of the pmf, not its exact polynomial representation.
pub fn exponential_coeff_view(m: usize, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return invalid("alpha must be positive");
    }
    if m > EXP_COEFF_VIEW_MAX_M {
        return Err(Error::TooLarge(format!("coefficient view limited to M <= {EXP_COEFF_VIEW_MAX_M}")));
    }
    let mut out = Vec::with_capacity(m + 1);
    let mut t = 1.0;
    for n in 0..=m {
        if n > 0 {
            t *= -alpha / n as f64;
        }
        out.push(t);
    }
    Ok(out)
}

/// `(1/α²)(1 - e^{-αM}(1 + αM + (αM)²/2 + (αM)³/6)) / (1 - e^{-αM}(1 + αM))`.
pub fn exp_variance_approx(m: usize, alpha: f64) -> f64 {
    let am = alpha * m as f64;
    let e = (-am).exp();
    let num = 1.0 - e * (1.0 + am + am * am / 2.0 + am * am * am / 6.0);
    let den = 1.0 - e * (1.0 + am);
    num / den / (alpha * alpha)
}

/// Variance of the continuous density `∝ e^{-αx}` on `[0, M]`:
/// `1/α² - M² e^{-αM} / (1 - e^{-αM})²`. [`exp_variance_approx`] tracks this
/// quantity; the discrete pmf tends to `e^{-α}/(1 - e^{-α})²` instead.
pub fn exp_variance_continuum(m: usize, alpha: f64) -> f64 {
    let am = alpha * m as f64;
    let e = (-am).exp();
    1.0 / (alpha * alpha) - (m as f64).powi(2) * e / ((1.0 - e) * (1.0 - e))
}

/// `ã_{M-1}/ã_M` of the degree-`M` interpolant through `ℙ_j = exp(lw_j)`,
/// from divided differences. Only reliable when the top node dominates (as
/// for `j^{M^x}`, `x ≥ 1`); general weights cancel catastrophically.
pub fn lead_ratio_from_log_weights(lw: &[f64]) -> Result<f64> {
    let m = lw.len().checked_sub(1).filter(|&m| m >= 1).ok_or_else(|| {
        Error::InvalidArgument("need at least two nodes".into())
    })?;
    let mut ln_fact = vec![0.0; m + 1];
    for k in 1..=m {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    // ln |f_j / w_j| with w_j = (-1)^{M-j} j! (M-j)!
    let terms: Vec<(usize, f64)> = lw
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_finite())
        .map(|(j, l)| (j, l - ln_fact[j] - ln_fact[m - j]))
        .collect();
    let top = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::InvalidDistribution("all weights are zero".into()));
    }
    let t_sum = (m * (m + 1) / 2) as f64;
    let sign = |j: usize| if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
    let lead = crate::exactnum::neumaier_sum(terms.iter().map(|&(j, l)| sign(j) * (l - top).exp()));
    let next = crate::exactnum::neumaier_sum(
        terms.iter().map(|&(j, l)| -sign(j) * (t_sum - j as f64) * (l - top).exp()),
    );
    if lead == 0.0 {
        return Err(Error::InvalidDistribution("leading coefficient vanishes".into()));
    }
    Ok(next / lead)
}

/// `ℙ_j = j^{M^x}`; order `M`, leading ratio from divided differences.
pub fn generalized_counterexample(m: usize, x: f64) -> Result<RealDist> {
    if m < 2 {
        return invalid("counterexample needs M >= 2");
    }
    let lw = log_power_weights(m, (m as f64).powf(x));
    let ratio = lead_ratio_from_log_weights(&lw)?;
    Ok(RealDist::from_log_weights(m, &lw)?.with_leading(m, Some(ratio)))
}

/// `ℙ_j = j^{M²}`.
pub fn counterexample(m: usize) -> Result<RealDist> {
    generalized_counterexample(m, 2.0)
}

/// Exact `ã_{M-1}/ã_M` for `j^{M²}` (small `M` only; the weights have `M²·log₂M` bits).
pub fn counterexample_ratio_exact(m: usize) -> Result<Rational> {
    if !(2..=40).contains(&m) {
        return invalid("exact counterexample ratio needs 2 <= M <= 40");
    }
    let probs: Vec<Rational> =
        (0..=m).map(|j| Rational::from_integer(crate::exactnum::ipow(j as i64, (m * m) as u32))).collect();
    let d = ExactDist::from_probs(m, probs)?;
    d.lead_ratio().cloned().ok_or_else(|| Error::InvalidDistribution("order below 1".into()))
}

/// The large-`M` ratio `(-M⁵ - 2M⁴ + 7M² + 16M + 12) / (2M(M+1)²)` obtained by
/// demanding `σ² ∝ M⁻²` in the asymptotic variance.
pub fn counterexample_ratio_paper(m: f64) -> f64 {
    (-m.powi(5) - 2.0 * m.powi(4) + 7.0 * m * m + 16.0 * m + 12.0) / (2.0 * m * (m * m + 2.0 * m + 1.0))
}

/// `M²(1+M²)/((3+M²)(2+M²)²)`: the variance of the continuous density
/// `∝ x^{M²}` on `[0, M]`. The discrete family is far narrower (about `e^{-M}`).
pub fn counterexample_variance_continuum(m: f64) -> f64 {
    let m2 = m * m;
    m2 * (1.0 + m2) / ((3.0 + m2) * (2.0 + m2) * (2.0 + m2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational_to_f64;

    #[test]
    fn power_law_norm_and_exact_agree() {
        let d = power_law_exact(100, 2).unwrap();
        assert_eq!(d.norm(), &ri(338350));
        let r = power_law(100, 2).unwrap();
        let rel = (r.variance_exact() / rational_to_f64(&d.variance_exact()) - 1.0).abs();
        assert!(rel < 1e-13, "{rel}");
        assert_eq!(r.order(), Some(2));
        assert_eq!(r.lead_ratio(), Some(&0.0));
        assert!(power_law(3, 4).is_err());
        assert!(power_law(3, 0).is_err());
    }

    #[test]
    fn triangular_variance() {
        // ℙ_j = j on {0..M}: direct summation
        for m in [1usize, 5, 17] {
            let d = power_law_exact(m, 1).unwrap();
            let w: Vec<f64> = (0..=m).map(|j| j as f64).collect();
            let n: f64 = w.iter().sum();
            let mu: f64 = w.iter().enumerate().map(|(j, x)| j as f64 * x).sum::<f64>() / n;
            let v: f64 = w.iter().enumerate().map(|(j, x)| (j as f64 - mu).powi(2) * x).sum::<f64>() / n;
            assert!((rational_to_f64(&d.variance_exact()) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_rounding() {
        assert_eq!(sqrt_power_order(100, 0.1).unwrap(), 1);
        assert_eq!(sqrt_power_order(100, 0.25).unwrap(), 3); // 2.5 rounds up
        assert_eq!(sqrt_power_order(10_000, 1.0).unwrap(), 100);
        assert!(sqrt_power_order(100, 0.01).is_err());
        let a = sqrt_power(100, 0.1).unwrap();
        let b = power_law(100, 1).unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn sqrt_power_variance_scale() {
        // finite-M form M²(s+1)/((s+3)(s+2)²), then the slow approach to M/γ²
        let d = sqrt_power(10_000, 1.0).unwrap();
        let s = 100.0;
        let finite = 1e8 * (s + 1.0) / ((s + 3.0) * (s + 2.0) * (s + 2.0));
        assert!((d.variance_exact() / finite - 1.0).abs() < 1e-3);
        let r4 = d.variance_exact() / 1e4;
        let r6 = sqrt_power(1_000_000, 1.0).unwrap().variance_exact() / 1e6;
        assert!(r4 < r6 && (r6 - 1.0).abs() < 0.01, "{r4} {r6}");
    }

    #[test]
    fn exponential_pmf() {
        for alpha in [0.3, 1.0, 2.0] {
            let d = exponential(50, alpha).unwrap();
            let total: f64 = d.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let p0 = (1.0 - (-alpha).exp()) / (1.0 - (-(51.0) * alpha).exp());
            assert!((d.prob(0) - p0).abs() < 1e-14);
        }
        assert!(exponential(10, 0.0).is_err());
        assert!(exponential(10, 60.0).unwrap().variance_exact() < 1e-20);
    }

    #[test]
    fn exponential_limits() {
        for alpha in [1.0, 1.5, 2.0] {
            assert!((exp_variance_approx(10_000, alpha) * alpha * alpha - 1.0).abs() < 1e-12);
        }
        for alpha in [1.0, 1.5, 2.0] {
            for m in 11..=200 {
                let c = exp_variance_continuum(m, alpha);
                assert!((exp_variance_approx(m, alpha) / c - 1.0).abs() < 0.01, "{alpha} {m}");
            }
            // the discrete pmf is a geometric law, not 1/α²
            let geo = (-alpha).exp() / (1.0 - (-alpha).exp()).powi(2);
            let exact = exponential(200, alpha).unwrap().variance_exact();
            assert!((exact / geo - 1.0).abs() < 1e-12);
            assert!((exact * alpha * alpha - 1.0).abs() > 0.05);
        }
        let v = exp_variance_approx(5, 2.0);
        assert!(v.is_finite() && v > 0.0);
        assert!(exponential_coeff_view(21, 1.0).is_err());
        assert_eq!(exponential_coeff_view(2, 2.0).unwrap(), vec![1.0, -2.0, 2.0]);
    }

    #[test]
    fn counterexample_ratio_matches_exact() {
        for m in [3usize, 6, 10] {
            let exact = rational_to_f64(&counterexample_ratio_exact(m).unwrap());
            let d = counterexample(m).unwrap();
            let approx = *d.lead_ratio().unwrap();
            assert!((approx / exact - 1.0).abs() < 1e-10, "M={m}: {approx} vs {exact}");
            assert_eq!(d.order(), Some(m));
        }
    }

    #[test]
    fn counterexample_concentrates() {
        let d = counterexample(30).unwrap();
        assert!(d.prob(30) > d.prob(29) * 1e10);
        assert!(d.variance_exact() < 1e-10);
    }

    #[test]
    fn spec_label_and_build() {
        let f = FamilySpec::PowerLaw { s: 3 };
        assert_eq!(f.label(), "power_s3");
        assert_eq!(f.build(10).unwrap().order(), Some(3));
        assert!(FamilySpec::Exponential { alpha: -1.0 }.build(5).is_err());
        assert!(FamilySpec::CustomCoeffs(vec![1.0, 1.0]).build(2).is_err());
        assert_eq!(FamilySpec::CustomCoeffs(vec![1.0, 1.0]).build(1).unwrap().order(), Some(1));
    }
}
