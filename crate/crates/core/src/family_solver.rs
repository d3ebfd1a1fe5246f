//! Distributions whose coefficients `ã_{s+1}..ã_M` all vanish.
//!
//! Fixing `ℙ_0` and the anchors `ℙ_1..ℙ_s`, the conditions
//! `ã_n = Σ_j 𝔄_{n,j} r_j = 0` (`n = s+1..M`, `r_j = (ℙ_j - ℙ_0)/j`) are
//! `M - s` independent linear equations in `r_{s+1}..r_M`. They are solved
//! exactly; by linearity the solution is a combination of `s` mode vectors,
//!
//! ```text
//! ℙ_j = ℙ_0 + Σ_q 𝔙_{q,j} (j/q) (ℙ_q - ℙ_0).
//! ```
//!
//! The profile `𝔙_{q,j}·j/q` is the Lagrange basis polynomial of node `q`
//! on `{0..s}` evaluated at `j`; the tests use that as the oracle.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::exactnum::{binomial, factorial, rat, rb, ri, rpow, Rational};
use crate::polydist::{signed_variance, ExactDist};
use crate::vandermonde::{bareiss_forward, clear_row, inverse_closed_form, p_polynomials, ExactMatrix};
use crate::{invalid, Error, Result};

/// Largest `M - s - 1` accepted by [`mode_basis_expansion`] (`2^{M-s-1}` chains).
pub const EXPANSION_CAP: usize = 22;

/// `S_s^M(x)`: complete homogeneous sum of degree `x` in `s+1, …, M`,
/// evaluated through the alternating form
/// `((-1)^{K}/K!) Σ_q (-1)^q C(K,q) (s+q+1)^{x+K}`, `K = M-s-1`.
/// For `s = M` the sum is empty: 1 at `x = 0`, else 0.
pub fn s_coefficient(m: usize, s: usize, x: usize) -> Result<Rational> {
    if s > m {
        return invalid(format!("S coefficient needs s <= M, got s = {s}, M = {m}"));
    }
    if s == m {
        return Ok(if x == 0 { Rational::one() } else { Rational::zero() });
    }
    let k = m - s - 1;
    let mut acc = num_bigint::BigInt::zero();
    for q in 0..=k {
        let t = binomial(k, q) * num_bigint::BigInt::from(s + q + 1).pow((x + k) as u32);
        if q % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    let v = Rational::new(acc, factorial(k));
    Ok(if k % 2 == 0 { v } else { -v })
}

/// `S_s^M(x)` by enumerating all compositions `θ_1 + … + θ_{M-s} = x` of
/// `Π (s+i)^{θ_i}`. Exponential; test oracle.
pub fn s_coefficient_compositions(m: usize, s: usize, x: usize) -> Rational {
    fn rec(vals: &[i64], x: usize) -> num_bigint::BigInt {
        match vals {
            [] => if x == 0 { One::one() } else { Zero::zero() },
            [v] => crate::exactnum::ipow(*v, x as u32),
            [v, rest @ ..] => (0..=x)
                .map(|t| crate::exactnum::ipow(*v, t as u32) * rec(rest, x - t))
                .sum(),
        }
    }
    let vals: Vec<i64> = (s as i64 + 1..=m as i64).collect();
    rb(rec(&vals, x))
}

/// The tabulated `Q_q^x(s)` for `x ≤ 3`, `q = 0..x`.
pub fn q_row(x: usize, s: &Rational) -> Result<Vec<Rational>> {
    let s2 = s * s;
    let s3 = &s2 * s;
    Ok(match x {
        0 => vec![ri(1)],
        1 => vec![rat(1, 2), (ri(1) + s) / ri(2)],
        2 => vec![rat(1, 8), (ri(6) * s + ri(7)) / ri(24), (ri(3) * &s2 + ri(5) * s + ri(2)) / ri(24)],
        3 => vec![
            rat(1, 48),
            (ri(3) * s + ri(4)) / ri(48),
            (ri(3) * &s2 + ri(6) * s + ri(3)) / ri(48),
            (s3 + ri(2) * &s2 + s) / ri(48),
        ],
        _ => return invalid("Q table only tabulated for x <= 3"),
    })
}

/// `Π_{q=0}^{x-1}(M-s+q) · Σ_q M^{x-q} Q_q^x(s)`.
pub fn s_coefficient_product_form(m: usize, s: usize, x: usize) -> Result<Rational> {
    let sr = ri(s as i64);
    let q = q_row(x, &sr)?;
    let mr = ri(m as i64);
    let pre: Rational = (0..x).map(|k| ri((m + k) as i64 - s as i64)).product();
    let sum: Rational = q.iter().enumerate().map(|(k, c)| rpow(&mr, (x - k) as i32) * c).sum();
    Ok(pre * sum)
}

/// One row of [`q_poly_check`].
#[derive(Clone, Debug, Serialize)]
pub struct QCheck {
    pub m: usize,
    pub s: usize,
    pub x: usize,
    pub product_form: String,
    pub direct: String,
    pub equal: bool,
}

/// Compares the product form against [`s_coefficient`] for every `M` in `ms` (`M > s`).
pub fn q_poly_check(x: usize, s: usize, ms: &[usize]) -> Result<Vec<QCheck>> {
    if x > 3 {
        return invalid("Q table only tabulated for x <= 3");
    }
    ms.iter()
        .filter(|&&m| m > s)
        .map(|&m| {
            let a = s_coefficient_product_form(m, s, x)?;
            let b = s_coefficient(m, s, x)?;
            Ok(QCheck {
                m,
                s,
                x,
                product_form: crate::exactnum::fmt_rational(&a),
                direct: crate::exactnum::fmt_rational(&b),
                equal: a == b,
            })
        })
        .collect()
}

/// `(i,j) = Σ_{p=M+j-i}^{M} (-1)^p P_p(M) S^M_{i-1}(p-j+i-M)` for `j ≤ i ≤ M`.
///
/// These are the entries of the eliminated triangular matrix in the form it
/// is usually quoted. Note that this matrix is row-equivalent to the system
/// `Σ_j 𝔄_{j,n} r_j = 0` (the transpose of the vanishing conditions), see the
/// tests; the solver below does not use it.
pub fn matrix_element(i: usize, j: usize, m: usize) -> Result<Rational> {
    if j == 0 || j > i || i > m {
        return invalid(format!("matrix element needs 1 <= j <= i <= M, got ({i}, {j}), M = {m}"));
    }
    let p = p_polynomials(m)?;
    let mut acc = Rational::zero();
    for pp in (m + j - i)..=m {
        let t = p.coeff(pp) * s_coefficient(m, i - 1, pp + i - j - m)?;
        if pp % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    Ok(acc)
}

/// Upper-triangular form of the vanishing conditions after exact elimination,
/// with one transformed right-hand side per column of `rhs`.
#[derive(Clone, Debug)]
struct Eliminated {
    u: Vec<Vec<Rational>>,
    b: Vec<Vec<Rational>>,
}

fn check_ms(m: usize, s: usize) -> Result<()> {
    if s == 0 || s >= m {
        return invalid(format!("need M > s >= 1, got M = {m}, s = {s}"));
    }
    Ok(())
}

/// Eliminates `Σ_{j>s} 𝔄_{n,j} r_j = rhs_n` for `n = s+1..M`. `rhs[e][c]` is
/// column `c` of the right-hand side for equation `n = s+1+e`.
fn eliminate(inv: &ExactMatrix, m: usize, s: usize, rhs: Vec<Vec<Rational>>) -> Result<Eliminated> {
    let k = m - s;
    let ncol = rhs.first().map_or(0, |r| r.len());
    // fraction-free: scale each augmented row to integers, then Bareiss
    let mut a: Vec<Vec<BigInt>> = rhs
        .into_iter()
        .enumerate()
        .map(|(e, b)| {
            let mut row: Vec<Rational> = (0..k).map(|t| inv.get(s + 1 + e, s + 1 + t).clone()).collect();
            row.extend(b);
            clear_row(&row).0
        })
        .collect();
    let (_, complete) = bareiss_forward(&mut a, k);
    if !complete {
        return Err(Error::Singular);
    }
    let to_rat = |v: &[BigInt]| -> Vec<Rational> { v.iter().map(|x| rb(x.clone())).collect() };
    Ok(Eliminated {
        u: a.iter().map(|r| to_rat(&r[..k])).collect(),
        b: a.iter().map(|r| to_rat(&r[k..k + ncol])).collect(),
    })
}

fn back_substitute(el: &Eliminated, col: usize) -> Vec<Rational> {
    let k = el.u.len();
    let mut x = vec![Rational::zero(); k];
    for t in (0..k).rev() {
        let mut acc = el.b[t][col].clone();
        for v in t + 1..k {
            acc -= &el.u[t][v] * &x[v];
        }
        x[t] = acc / &el.u[t][t];
    }
    x
}

/// Back-substitution written out: `x_k = Σ_chains (-1)^r Π (U_{c_i,c_{i+1}}/U_{c_i,c_i}) · b_{c_r}/U_{c_r,c_r}`
/// over all chains `k = c_0 < c_1 < … < c_r`.
fn chain_expansion(el: &Eliminated, col: usize) -> Vec<Rational> {
    let k = el.u.len();
    (0..k)
        .map(|start| {
            let tail = k - 1 - start;
            let mut total = Rational::zero();
            for mask in 0u64..(1u64 << tail) {
                let mut cur = start;
                let mut term = Rational::one();
                let mut neg = false;
                for bit in 0..tail {
                    if mask >> bit & 1 == 1 {
                        let next = start + 1 + bit;
                        term *= &el.u[cur][next] / &el.u[cur][cur];
                        neg = !neg;
                        cur = next;
                    }
                }
                term *= &el.b[cur][col] / &el.u[cur][cur];
                if neg {
                    total -= term;
                } else {
                    total += term;
                }
            }
            total
        })
        .collect()
}

/// Solution of the vanishing conditions for given anchors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedSolution {
    pub m: usize,
    pub s: usize,
    /// `ℙ_0..ℙ_M`, possibly signed.
    pub weights: Vec<Rational>,
}

impl ConstrainedSolution {
    /// Variance functional of the (possibly signed) weights.
    pub fn variance(&self) -> Result<Rational> {
        signed_variance(&self.weights)
    }

    /// Strict conversion; fails on negative weights.
    pub fn into_dist(self) -> Result<ExactDist> {
        ExactDist::from_probs(self.m, self.weights)
    }
}

/// Solves for `ℙ_{s+1}..ℙ_M` given `ℙ_0` and `anchors = (ℙ_1..ℙ_s)`.
pub fn solve_constrained(m: usize, s: usize, p0: &Rational, anchors: &[Rational]) -> Result<ConstrainedSolution> {
    check_ms(m, s)?;
    if anchors.len() != s {
        return invalid(format!("expected {s} anchors, got {}", anchors.len()));
    }
    let inv = inverse_closed_form(m)?;
    let r: Vec<Rational> = anchors.iter().enumerate().map(|(i, p)| (p - p0) / ri(i as i64 + 1)).collect();
    let rhs = (s + 1..=m)
        .map(|n| vec![-(1..=s).map(|q| inv.get(n, q) * &r[q - 1]).sum::<Rational>()])
        .collect();
    let el = eliminate(&inv, m, s, rhs)?;
    let x = back_substitute(&el, 0);
    let mut weights = vec![p0.clone()];
    weights.extend(anchors.iter().cloned());
    weights.extend(x.iter().enumerate().map(|(t, v)| p0 + v * ri((s + 1 + t) as i64)));
    Ok(ConstrainedSolution { m, s, weights })
}

/// The `s` mode vectors `𝔙_q = (𝔙_{q,j})_{j=s+1..M}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeBasis {
    pub m: usize,
    pub s: usize,
    /// `modes[q-1][j-s-1] = 𝔙_{q,j}`.
    pub modes: Vec<Vec<Rational>>,
}

impl ModeBasis {
    /// `𝔙_{q,j}` for any `j` in `1..=M` (`δ_{q,j}` for `j ≤ s`).
    pub fn value(&self, q: usize, j: usize) -> Rational {
        if j <= self.s {
            if j == q { Rational::one() } else { Rational::zero() }
        } else {
            self.modes[q - 1][j - self.s - 1].clone()
        }
    }

    /// `𝔙_{q,j}·j/q` for `j = s+1..M`.
    pub fn profile(&self, q: usize) -> Vec<Rational> {
        self.modes[q - 1]
            .iter()
            .enumerate()
            .map(|(t, v)| v * ri((self.s + 1 + t) as i64) / ri(q as i64))
            .collect()
    }

    /// `ℙ_j = ℙ_0 + Σ_q 𝔙_{q,j}(j/q)(ℙ_q - ℙ_0)` for `j = 0..M`.
    pub fn reconstruct(&self, p0: &Rational, anchors: &[Rational]) -> Result<Vec<Rational>> {
        if anchors.len() != self.s {
            return invalid(format!("expected {} anchors, got {}", self.s, anchors.len()));
        }
        Ok((0..=self.m)
            .map(|j| {
                if j == 0 {
                    return p0.clone();
                }
                let mut acc = p0.clone();
                for q in 1..=self.s {
                    let v = self.value(q, j);
                    if !v.is_zero() {
                        acc += v * ri(j as i64) / ri(q as i64) * (&anchors[q - 1] - p0);
                    }
                }
                acc
            })
            .collect())
    }

    /// Variance functional of mode `q` restricted to `j = s+1..M`.
    pub fn tail_variance(&self, q: usize) -> Result<Rational> {
        let mut w = vec![Rational::zero(); self.s + 1];
        w.extend(self.profile(q));
        signed_variance(&w)
    }
}

fn unit_rhs(inv: &ExactMatrix, m: usize, s: usize) -> Vec<Vec<Rational>> {
    // mode q: r_q = 1, other anchors 0
    (s + 1..=m).map(|n| (1..=s).map(|q| -inv.get(n, q)).collect()).collect()
}

/// Mode vectors by exact elimination and back-substitution.
pub fn mode_basis(m: usize, s: usize) -> Result<ModeBasis> {
    check_ms(m, s)?;
    let inv = inverse_closed_form(m)?;
    let el = eliminate(&inv, m, s, unit_rhs(&inv, m, s))?;
    Ok(ModeBasis { m, s, modes: (0..s).map(|c| back_substitute(&el, c)).collect() })
}

/// Mode vectors by explicit expansion over the `2^{M-s-1}` chains of the
/// triangular system. Capped at `M - s - 1 ≤` [`EXPANSION_CAP`].
pub fn mode_basis_expansion(m: usize, s: usize) -> Result<ModeBasis> {
    check_ms(m, s)?;
    if m - s - 1 > EXPANSION_CAP {
        return Err(Error::TooLarge(format!(
            "chain expansion needs M - s - 1 <= {EXPANSION_CAP}, got {}",
            m - s - 1
        )));
    }
    let inv = inverse_closed_form(m)?;
    let el = eliminate(&inv, m, s, unit_rhs(&inv, m, s))?;
    Ok(ModeBasis { m, s, modes: (0..s).map(|c| chain_expansion(&el, c)).collect() })
}

/// Per-mode quadratic fits of the tail variance against `M`.
#[derive(Clone, Debug, Serialize)]
pub struct ModeVarianceFit {
    pub s: usize,
    pub ms: Vec<usize>,
    /// `variances[q-1][i]` at `ms[i]`.
    pub variances: Vec<Vec<f64>>,
    /// `(c₀, c₁, c₂)` of `var ≈ c₀ + c₁ M + c₂ M²` per mode.
    pub fits: Vec<Vec<f64>>,
}

impl ModeVarianceFit {
    pub fn leading(&self) -> Vec<f64> {
        self.fits.iter().map(|f| f[2]).collect()
    }
}

/// Builds the mode basis at every `M` in `ms` (in parallel) and fits each
/// mode's tail variance with a quadratic in `M`.
pub fn mode_variance_fit(s: usize, ms: &[usize]) -> Result<ModeVarianceFit> {
    if ms.len() < 4 {
        return invalid("need at least 4 values of M");
    }
    let per_m: Vec<Vec<f64>> = ms
        .par_iter()
        .map(|&m| {
            let b = mode_basis(m, s)?;
            (1..=s).map(|q| Ok(crate::exactnum::rational_to_f64(&b.tail_variance(q)?))).collect()
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let variances: Vec<Vec<f64>> = (0..s).map(|q| per_m.iter().map(|v| v[q]).collect()).collect();
    let fits = variances.iter().map(|v| crate::sampler::polyfit(&xs, v, 2)).collect::<Result<_>>()?;
    Ok(ModeVarianceFit { s, ms: ms.to_vec(), variances, fits })
}

/// True when `(i,j)` rows `i = s+1..M` (zero for `j > i`) span the same row
/// space as `Σ_j 𝔄_{j,n} r_j` for `n = s+1..M`, columns `j = 1..M`.
pub fn matrix_rows_match_transposed_system(m: usize, s: usize) -> Result<bool> {
    check_ms(m, s)?;
    let inv = inverse_closed_form(m)?;
    let k = m - s;
    let tri: Vec<Vec<Rational>> = (s + 1..=m)
        .map(|i| (1..=m).map(|j| if j <= i { matrix_element(i, j, m) } else { Ok(Rational::zero()) }).collect())
        .collect::<Result<_>>()?;
    let lit: Vec<Vec<Rational>> =
        (s + 1..=m).map(|n| (1..=m).map(|j| inv.get(j, n).clone()).collect()).collect();
    let stacked = ExactMatrix::from_rows(tri.iter().chain(lit.iter()).cloned().collect())?;
    let a = ExactMatrix::from_rows(tri)?;
    Ok(a.rank() == k && stacked.rank() == k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lagrange(q: usize, s: usize, j: usize) -> Rational {
        let mut v = Rational::one();
        for k in 0..=s {
            if k != q {
                v *= ri(j as i64 - k as i64) / ri(q as i64 - k as i64);
            }
        }
        v
    }

    #[test]
    fn s_coefficient_examples() {
        for m in 2..9 {
            for x in 0..5 {
                assert_eq!(s_coefficient(m, m - 1, x).unwrap(), rpow(&ri(m as i64), x as i32));
            }
            assert_eq!(s_coefficient(m, m, 0).unwrap(), ri(1));
            assert_eq!(s_coefficient(m, m, 3).unwrap(), ri(0));
        }
        assert_eq!(s_coefficient(5, 2, 2).unwrap(), s_coefficient_compositions(5, 2, 2));
        assert_eq!(s_coefficient(5, 2, 2).unwrap(), ri(9 + 16 + 25 + 12 + 15 + 20));
        assert!(s_coefficient(3, 4, 0).is_err());
    }

    #[test]
    fn s_coefficient_against_compositions_and_recursion() {
        for m in 1..9 {
            for s in 0..m {
                for x in 0..6 {
                    let v = s_coefficient(m, s, x).unwrap();
                    assert_eq!(v, s_coefficient_compositions(m, s, x), "{m} {s} {x}");
                    if x > 0 {
                        let rec: Rational = (s + 1..=m)
                            .map(|j| ri(j as i64) * s_coefficient(j, s, x - 1).unwrap())
                            .sum();
                        assert_eq!(v, rec);
                    }
                }
            }
        }
    }

    #[test]
    fn q_table() {
        assert_eq!(s_coefficient_product_form(7, 3, 1).unwrap(), ri(22));
        assert_eq!(s_coefficient(7, 3, 1).unwrap(), ri(22));
        for x in 0..=3 {
            for s in 0..6 {
                let rows = q_poly_check(x, s, &(1..14).collect::<Vec<_>>()).unwrap();
                assert!(rows.iter().all(|r| r.equal), "x={x} s={s}");
            }
        }
        assert!(q_poly_check(4, 1, &[5]).is_err());
    }

    #[test]
    fn matrix_element_diagonal_and_rows() {
        for m in 2..8 {
            for i in 1..=m {
                let expect = if m % 2 == 0 { ri(1) } else { ri(-1) };
                assert_eq!(matrix_element(i, i, m).unwrap(), expect);
            }
        }
        assert_eq!(matrix_element(4, 4, 4).unwrap(), ri(1));
        assert!(matrix_element(3, 4, 5).is_err());
        for (m, s) in [(4, 1), (6, 2), (7, 3), (8, 5)] {
            assert!(matrix_rows_match_transposed_system(m, s).unwrap(), "M={m} s={s}");
        }
    }

    #[test]
    fn linear_family() {
        let sol = solve_constrained(5, 1, &ri(0), &[ri(1)]).unwrap();
        assert_eq!(sol.weights, (0..=5).map(ri).collect::<Vec<_>>());
        let d = sol.into_dist().unwrap();
        assert_eq!(d.order(), Some(1));
        assert_eq!(d.coeffs().unwrap()[1], ri(1));
    }

    #[test]
    fn vanishing_and_anchors() {
        let anchors = [rat(3, 2), rat(-2, 7)];
        let p0 = rat(5, 3);
        let sol = solve_constrained(8, 2, &p0, &anchors).unwrap();
        assert_eq!(sol.weights[0], p0);
        assert_eq!(&sol.weights[1..3], &anchors);
        let c = crate::polydist::coeffs_from_probs(&sol.weights).unwrap();
        assert!(c[3..].iter().all(|x| x.is_zero()));
        let basis = mode_basis(8, 2).unwrap();
        assert_eq!(basis.reconstruct(&p0, &anchors).unwrap(), sol.weights);
    }

    #[test]
    fn constant_extension() {
        let sol = solve_constrained(6, 2, &ri(4), &[ri(4), ri(4)]).unwrap();
        assert!(sol.weights.iter().all(|w| *w == ri(4)));
    }

    #[test]
    fn modes_are_lagrange_basis() {
        for (m, s) in [(5, 1), (9, 3), (12, 4)] {
            let b = mode_basis(m, s).unwrap();
            for q in 1..=s {
                let prof = b.profile(q);
                for (t, v) in prof.iter().enumerate() {
                    assert_eq!(v, &lagrange(q, s, s + 1 + t));
                }
            }
        }
    }

    #[test]
    fn expansion_matches_back_substitution() {
        assert_eq!(mode_basis_expansion(8, 3).unwrap(), mode_basis(8, 3).unwrap());
        assert_eq!(mode_basis_expansion(4, 3).unwrap(), mode_basis(4, 3).unwrap());
        assert!(mode_basis_expansion(40, 10).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(solve_constrained(3, 3, &ri(0), &[ri(1), ri(2), ri(3)]).is_err());
        assert!(solve_constrained(5, 2, &ri(0), &[ri(1)]).is_err());
        assert!(mode_basis(5, 0).is_err());
    }
}
