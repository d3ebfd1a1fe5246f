//! Combinatorial identities behind the inverse Vandermonde formulas, each
//! evaluated twice: once by a closed form and once by direct enumeration.
//!
//! All arithmetic is exact. Enumerators are the reference; closed forms are
//! what is being checked. A few printed variants that do not hold as written
//! are kept as diagnostics ([`IdentityReport::binding`] is `false` for them)
//! next to the corrected forms.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::exactnum::{
    bernoulli, binomial, binomial_i, double_factorial, factorial, fmt_rational, rat, rb, ri, rpow, RatPoly, Rational,
};
use crate::vandermonde::ExactMatrix;
use crate::{invalid, Result};

/// Outcome of one identity over its parameter box.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub ranges: String,
    /// Whether this check counts toward the suite verdict.
    pub binding: bool,
    pub instances: usize,
    pub failures: usize,
    pub pass: bool,
    pub first_counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub params: String,
    pub lhs: String,
    pub rhs: String,
}

impl IdentityReport {
    fn build(name: &str, ranges: &str, binding: bool, checks: Vec<Instance>) -> Self {
        let instances = checks.len();
        let failures = checks.iter().filter(|c| !c.ok).count();
        let first_counterexample = checks
            .into_iter()
            .find(|c| !c.ok)
            .map(|c| Counterexample { params: c.params, lhs: c.lhs, rhs: c.rhs });
        IdentityReport {
            name: name.to_string(),
            ranges: ranges.to_string(),
            binding,
            instances,
            failures,
            pass: failures == 0,
            first_counterexample,
        }
    }
}

struct Instance {
    params: String,
    ok: bool,
    lhs: String,
    rhs: String,
}

impl Instance {
    fn eq(params: String, lhs: &Rational, rhs: &Rational) -> Self {
        Instance { params, ok: lhs == rhs, lhs: fmt_rational(lhs), rhs: fmt_rational(rhs) }
    }
}

fn df(n: i64) -> Rational {
    rb(double_factorial(n).expect("double factorial below -1"))
}

fn rbin(n: usize, k: usize) -> Rational {
    rb(binomial(n, k))
}

fn rbin_i(n: i64, k: i64) -> Rational {
    rb(binomial_i(n, k))
}

fn ipow_r(base: i64, e: usize) -> Rational {
    rpow(&ri(base), e as i32)
}

fn sign(e: i64) -> Rational {
    if e.rem_euclid(2) == 0 {
        ri(1)
    } else {
        ri(-1)
    }
}

// ---------------------------------------------------------------- Simplex I

/// `Σ_{j_1+…+j_N = l} Π j_p^{n_p}` (by convolution of the sequences `j^{n_p}`)
/// and the leading-order `l^{|n|+N-1} Π n_p! / (|n|+N-1)!`.
pub fn simplex_i(n_vec: &[usize], l: usize) -> Result<(Rational, Rational)> {
    if n_vec.is_empty() {
        return invalid("Simplex I needs N >= 1");
    }
    let seq = |n: usize| -> Vec<Rational> { (0..=l).map(|j| ipow_r(j as i64, n)).collect() };
    let mut acc = seq(n_vec[0]);
    for &n in &n_vec[1..] {
        let b = seq(n);
        let mut next = vec![Rational::zero(); l + 1];
        for (i, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(l + 1 - i) {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    let big_n = n_vec.len();
    let norm: usize = n_vec.iter().sum();
    let deg = norm + big_n - 1;
    let mut rhs = ipow_r(l as i64, deg) / rb(factorial(deg));
    for &n in n_vec {
        rhs *= rb(factorial(n));
    }
    Ok((acc[l].clone(), rhs))
}

// --------------------------------------------------------------- Simplex II

/// `Σ_{0≤j_1<…<j_s≤n} Π j_p^{n_p}` as a polynomial in `t = n + 1`, built by
/// summing out `j_1, j_2, …` with Faulhaber's formula.
pub fn simplex_ii_poly(n_vec: &[usize]) -> RatPoly {
    let mut g: Option<RatPoly> = None;
    for &n in n_vec {
        let term = RatPoly::monomial(n);
        let inner = match &g {
            None => term,
            Some(prev) => term.mul(prev),
        };
        g = Some(inner.sum_below());
    }
    g.unwrap_or_else(|| RatPoly::constant(ri(1)))
}

/// Direct enumeration of the Simplex II sum at a given `n`.
pub fn simplex_ii_brute(n_vec: &[usize], n: usize) -> Rational {
    (0..=n)
        .combinations(n_vec.len())
        .map(|js| js.iter().zip(n_vec).map(|(&j, &e)| ipow_r(j as i64, e)).product::<Rational>())
        .sum()
}

/// The polynomial through enough enumerated values of [`simplex_ii_brute`].
pub fn simplex_ii_brute_poly(n_vec: &[usize]) -> RatPoly {
    let deg = n_vec.iter().sum::<usize>() + n_vec.len();
    let pts: Vec<(Rational, Rational)> = (0..=deg).map(|n| (ri(n as i64 + 1), simplex_ii_brute(n_vec, n))).collect();
    RatPoly::interpolate(&pts)
}

fn group_bernoulli(js: &[usize]) -> Rational {
    let mut prod = ri(1);
    for (_, grp) in &js.iter().chunk_by(|&&j| j) {
        let d = grp.count();
        prod *= bernoulli(d) / rb(factorial(d));
    }
    prod
}

/// The general coefficient `ℂ^{(s)}_m` with weakly ordered indices and group
/// multiplicities. Matches the Faulhaber expansion for `s = 1` and for the two
/// leading coefficients; a diagnostic elsewhere.
pub fn simplex_ii_general(n_vec: &[usize], m: usize) -> Result<Rational> {
    let s = n_vec.len();
    let mut big_n = vec![0i64; s + 1];
    for (p, &n) in n_vec.iter().enumerate() {
        big_n[p + 1] = big_n[p] + n as i64;
    }
    let top = big_n[s] as usize + s;
    if m == 0 || m > top || s == 0 {
        return invalid(format!("need 1 <= m <= {top}"));
    }
    let len = top - m;
    let mut total = Rational::zero();
    for js in (1..=s).combinations_with_replacement(len) {
        let mut num = ri(1);
        for (p, &j) in js.iter().enumerate() {
            num *= ri(big_n[j] + j as i64 - p as i64);
        }
        let mut den = ri(1);
        for p in 1..=s {
            let below = js.iter().filter(|&&j| p > j).count() as i64;
            den *= ri(big_n[p] + p as i64 - below);
        }
        if den.is_zero() {
            continue;
        }
        total += num / den * group_bernoulli(&js);
    }
    Ok(total)
}

/// `ℂ^s_m` for `n_j = 1`:
/// `(1/m!!) Σ_{1≤j_1≤…≤j_{2s-m}≤s} Π_p (2j_p-p)!!/(2j_p-p-1)!! · Π_groups B_d/d!`.
/// Equals the Faulhaber coefficient for `m ∈ {2s, 2s-1}`.
pub fn simplex_ii_special(s: usize, m: usize) -> Result<Rational> {
    if s == 0 || m == 0 || m > 2 * s {
        return invalid("need s >= 1 and 1 <= m <= 2s");
    }
    let len = 2 * s - m;
    let mut total = Rational::zero();
    for js in (1..=s).combinations_with_replacement(len) {
        let mut term = ri(1);
        for (idx, &j) in js.iter().enumerate() {
            let p = idx as i64 + 1;
            let lo = 2 * j as i64 - p - 1;
            if lo < -1 {
                term = Rational::zero();
                break;
            }
            term *= df(lo + 1) / df(lo);
        }
        if !term.is_zero() {
            total += term * group_bernoulli(&js);
        }
    }
    Ok(total / df(m as i64))
}

/// Resummed `ℂ^{(s)}_m` for `n_j = 1` and `m = 2s - k`, `k ∈ {0, 1, 2, 3}`.
/// `printed = true` gives the lines exactly as printed; the `k = 2` and `k = 3`
/// lines need `s² → s² - 1` and `-1/5 → -6/5` respectively to hold.
pub fn simplex_ii_resummed(s: usize, k: usize, printed: bool) -> Result<Rational> {
    if s == 0 || k > 3 || (k == 3 && s < 2) {
        return invalid("resummed lines cover m = 2s..2s-3 (s >= 2 for the last)");
    }
    let si = s as i64;
    let sr = ri(si);
    let (b1, b2, b3) = (bernoulli(1), bernoulli(2), bernoulli(3));
    let v = match k {
        0 => ri(1) / df(2 * si),
        1 => rat(1, 3) * df(2 * si + 1) / df(2 * si - 2) * &b1 / df(2 * si - 1),
        2 => {
            let sq = if printed { &sr * &sr } else { &sr * &sr - ri(1) };
            (rat(1, 9) * ri((si - 1) * si * (1 + 4 * si)) * &b1 * &b1 + sq * &b2 / ri(2)) / df(2 * si - 2)
        }
        _ => {
            let c = if printed { rat(-1, 5) } else { rat(-6, 5) };
            let cube = rat(1, 3) * (rat(2, 45) + rat(7, 135) * &sr - rat(1, 3) * &sr * &sr + rat(4, 27) * rpow(&sr, 3));
            let mixed = rat(1, 3) * (c - rat(2, 5) * &sr + &sr * &sr);
            let inner = cube * rpow(&b1, 3) + mixed * &b2 / ri(2) * &b1 + rat(1, 5) * ri(2 * si + 1) * &b3 / ri(6);
            df(2 * si - 1) / df(2 * si - 4) * inner / df(2 * si - 3)
        }
    };
    Ok(v)
}

// -------------------------------------------------------------- Simplex III

/// Direct `Σ_{a≤j_1<…<j_s≤b} Π j_p^{n_p}`.
pub fn simplex_iii_brute(a: usize, b: usize, n_vec: &[usize]) -> Rational {
    (a..=b)
        .combinations(n_vec.len())
        .map(|js| js.iter().zip(n_vec).map(|(&j, &e)| ipow_r(j as i64, e)).product::<Rational>())
        .sum()
}

/// Shift `j → a + k`, expand each power binomially and apply Simplex II:
/// `Σ_{k⃗≤n⃗} Π C(n_p,k_p) a^{|n|-|k|} · G_{k⃗}(b-a+1)`.
pub fn simplex_iii(a: usize, b: usize, n_vec: &[usize]) -> Result<(Rational, Rational)> {
    if a > b || n_vec.is_empty() {
        return invalid("need a <= b and s >= 1");
    }
    let t = ri((b - a + 1) as i64);
    let norm: usize = n_vec.iter().sum();
    let mut rhs = Rational::zero();
    for ks in n_vec.iter().map(|&n| 0..=n).multi_cartesian_product() {
        let coef: Rational = ks.iter().zip(n_vec).map(|(&k, &n)| rbin(n, k)).product();
        let drop = norm - ks.iter().sum::<usize>();
        rhs += coef * ipow_r(a as i64, drop) * simplex_ii_poly(&ks).eval(&t);
    }
    Ok((simplex_iii_brute(a, b, n_vec), rhs))
}

/// The printed double sum `Σ_{m1,m2} ℂ_{m1} C(N_s, m2) (b-a+1)^{m1} a^{m2}`
/// (diagnostic; it agrees with the brute force only when `a = 0`).
pub fn simplex_iii_printed(a: usize, b: usize, n_vec: &[usize]) -> Result<Rational> {
    if a > b || n_vec.is_empty() {
        return invalid("need a <= b and s >= 1");
    }
    let poly = simplex_ii_poly(n_vec);
    let ns: usize = n_vec.iter().sum();
    let s = n_vec.len();
    let t = ri((b - a + 1) as i64);
    let mut total = Rational::zero();
    for m1 in 0..=ns + s {
        for m2 in 0..=ns.min(ns + s - m1) {
            total += poly.coeff(m1) * rbin(ns, m2) * rpow(&t, m1 as i32) * ipow_r(a as i64, m2);
        }
    }
    Ok(total)
}

// ----------------------------------------------------- Simplex IV and V

fn chain_sum(q: usize, j: usize, qt: usize, lo: usize, hi: usize) -> Rational {
    let mut total = Rational::zero();
    for mids in (lo..hi).combinations(qt) {
        let mut chain = Vec::with_capacity(qt + 2);
        chain.push(j);
        chain.extend(mids.iter().rev());
        chain.push(q);
        total += chain.windows(2).map(|w| rbin(w[0] - 1, w[1] - 1)).product::<Rational>();
    }
    total
}

/// Ordered surjections of an `m`-set onto `k` labelled blocks.
fn surjections(m: usize, k: usize) -> Rational {
    (0..=k).map(|l| sign((k - l) as i64) * rbin(k, l) * ipow_r(l as i64, m)).sum()
}

/// Chains `q < j_{q̃-1} < … < j_0 < j` weighted by `Π C(j_{l-1}-1, j_l-1)`,
/// against `C(j-1, q-1) Σ_l l^{j-q} (-1)^{q̃+1-l} C(q̃+1, q̃+1-l)`.
pub fn simplex_iv(q: usize, j: usize, qt: usize) -> Result<(Rational, Rational)> {
    if q == 0 || j < q + qt + 1 {
        return invalid("need q >= 1 and j - q >= q~ + 1");
    }
    let lhs = chain_sum(q, j, qt, q + 1, j);
    let rhs = rbin(j - 1, q - 1)
        * (1..=qt + 1)
            .map(|l| ipow_r(l as i64, j - q) * sign((qt + 1 - l) as i64) * rbin(qt + 1, qt + 1 - l))
            .sum::<Rational>();
    Ok((lhs, rhs))
}

fn check_simplex_v(q: usize, j: usize, qt: usize, p1: usize, p2: usize) -> Result<()> {
    if q == 0 || j < q + p1 + p2 + qt + 1 {
        return invalid("need q >= 1 and j - q >= p1 + p2 + q~ + 1");
    }
    Ok(())
}

/// Chains with interior points restricted to `(q+p1, j-p2)`. The closed form
/// counts ordered set partitions of the `j-q` free labels whose top block has
/// at least `p2+1` and bottom block at least `p1+1` elements.
pub fn simplex_v(q: usize, j: usize, qt: usize, p1: usize, p2: usize) -> Result<(Rational, Rational)> {
    check_simplex_v(q, j, qt, p1, p2)?;
    let lhs = chain_sum(q, j, qt, q + p1 + 1, j - p2);
    let base = rbin(j - 1, q - 1);
    if qt == 0 {
        return Ok((lhs, base));
    }
    let n = j - q;
    let mut count = Rational::zero();
    for top in p2 + 1..=n {
        for bottom in p1 + 1..=n - top {
            count += rbin(n, top) * rbin(n - top, bottom) * surjections(n - top - bottom, qt - 1);
        }
    }
    Ok((lhs, base * count))
}

/// The printed correction with the `β` coefficients (diagnostic).
pub fn simplex_v_printed(q: usize, j: usize, qt: usize, p1: usize, p2: usize) -> Result<Rational> {
    check_simplex_v(q, j, qt, p1, p2)?;
    let (_, s4) = simplex_iv(q, j, qt)?;
    let (qi, ji, qti, p1i, p2i) = (q as i64, j as i64, qt as i64, p1 as i64, p2 as i64);
    let gap = ji - qi - (p1i + p2i);
    let beta = |l1: i64, l2: i64, l3: i64| -> Rational {
        let mut t = Rational::zero();
        for q2 in 1..qti {
            for q1 in q2 + 1..qti {
                if q2 <= p2i && q1 - q2 <= gap && qti - q1 <= p1i - 1 {
                    t += rbin_i(qti - q1, l1) * rbin_i(q1 - q2 + 1, l2) * rbin_i(q2 + 1, l3);
                }
            }
        }
        t
    };
    let pref = rbin_i(qi + p1i - 1, qi - 1) * rbin_i(ji - p2i - 1, qi + p1i - 2) * rbin_i(ji - 1, ji - p2i - 2);
    let mut corr = Rational::zero();
    for l1 in 1..=p1i {
        for l2 in 1..=gap {
            for l3 in 1..=p2i + 1 {
                let b = beta(l1, l2, l3);
                if b.is_zero() {
                    continue;
                }
                corr += &pref
                    * ipow_r(l1, p1)
                    * ipow_r(l2, gap as usize)
                    * ipow_r(l3, p2 + 1)
                    * sign(qti + 3 - (l1 + l2 + l3))
                    * b;
            }
        }
    }
    Ok(s4 - corr)
}

// ------------------------------------------------------- binomial identity

fn binomial_coeffs(s: usize, e: usize, x: usize) -> Vec<Rational> {
    // (x+q+1) A_q = Σ_{l>q} A_l C(l+1,q)(-1)^{l+1-q} + C(e,q) s^{e-q}, q = e..0
    let mut a = vec![Rational::zero(); e + 1];
    for q in (0..=e).rev() {
        let mut rhs = rbin(e, q) * ipow_r(s as i64, e - q);
        for l in q + 1..=e {
            rhs += &a[l] * rbin(l + 1, q) * sign((l + 1 - q) as i64);
        }
        a[q] = rhs / ri((x + q + 1) as i64);
    }
    a
}

/// `f_p(n, x) = (x+1) Σ_q A_q n^q` with the coefficients solved top-down.
pub fn binomial_f(s: usize, p: i64, x: usize, n: usize) -> Result<Rational> {
    if p < -1 {
        return invalid("need p >= -1");
    }
    let a = binomial_coeffs(s, (p + 1) as usize, x);
    let nr = ri(n as i64);
    Ok(ri(x as i64 + 1) * a.iter().enumerate().map(|(q, c)| c * rpow(&nr, q as i32)).sum::<Rational>())
}

/// `f_p(n, x)` from `f(n) = ((n-1) f(n-1) + (x+1)(s+n)^{p+1}) / (x+n)`.
pub fn binomial_f_recursive(s: usize, p: i64, x: usize, n: usize) -> Result<Rational> {
    if p < -1 {
        return invalid("need p >= -1");
    }
    let e = (p + 1) as usize;
    let mut f = Rational::zero();
    for k in 1..=n {
        f = (ri(k as i64 - 1) * f + ri(x as i64 + 1) * ipow_r((s + k) as i64, e)) / ri((x + k) as i64);
    }
    Ok(f)
}

/// `(Σ_{j=1}^{M-s} C(x+j-1,x)(j+s)^{p+1}`, factorial-sum form, `C(M-s+x,x+1) f_p(M-s,x))`.
pub fn binomial_identity(s: usize, p: i64, x: usize, m: usize) -> Result<(Rational, Rational, Rational)> {
    if m <= s || p < -1 {
        return invalid("need M > s and p >= -1");
    }
    let e = (p + 1) as usize;
    let n = m - s;
    let lhs: Rational = (1..=n).map(|j| rbin(x + j - 1, x) * ipow_r((j + s) as i64, e)).sum();
    let head = rbin(n + x, x + 1);
    let inner: Rational = (1..=n)
        .map(|q| rb(factorial(x + q - 1)) / (rb(factorial(q - 1)) * rb(factorial(x + n))) * ipow_r((s + q) as i64, e))
        .sum();
    let rhs = &head * ri(x as i64 + 1) * rb(factorial(n - 1)) * inner;
    let rhs2 = head * binomial_f(s, p, x, n)?;
    Ok((lhs, rhs, rhs2))
}

// ------------------------------------------------- hypergeometric identity

/// Solves `((2a+1)+2(p+1)) A_p - 2 Σ_{q>p} C(q+1,p)(-1)^{q+1-p} A_q = (2a+3) a_p`.
pub fn hypergeometric_coeffs(a: usize, coeffs: &[Rational]) -> Vec<Rational> {
    let n = coeffs.len();
    let ai = a as i64;
    let mut big = vec![Rational::zero(); n];
    for p in (0..n).rev() {
        let mut rhs = ri(2 * ai + 3) * &coeffs[p];
        for q in p + 1..n {
            rhs += ri(2) * rbin(q + 1, p) * sign((q + 1 - p) as i64) * &big[q];
        }
        big[p] = rhs / ri(2 * ai + 1 + 2 * (p as i64 + 1));
    }
    big
}

/// `Σ_{j=1}^s (2j+2a-1)!!/(2j-2)!! · Σ a_q j^q` against
/// `(2s+2a+1)!!/((2a+3)(2s-2)!!) · Σ A_q s^q`.
pub fn hypergeometric_identity(a: usize, coeffs: &[Rational], s: usize) -> Result<(Rational, Rational)> {
    if s == 0 || coeffs.is_empty() {
        return invalid("need s >= 1 and at least one coefficient");
    }
    let ai = a as i64;
    let poly = |c: &[Rational], j: i64| -> Rational {
        let jr = ri(j);
        c.iter().enumerate().map(|(q, x)| x * rpow(&jr, q as i32)).sum()
    };
    let lhs: Rational = (1..=s as i64).map(|j| df(2 * j + 2 * ai - 1) / df(2 * j - 2) * poly(coeffs, j)).sum();
    let big = hypergeometric_coeffs(a, coeffs);
    let si = s as i64;
    let rhs = df(2 * si + 2 * ai + 1) / (df(2 * si - 2) * ri(2 * ai + 3)) * poly(&big, si);
    Ok((lhs, rhs))
}

// ------------------------------------------------------ bulk and border sums

fn bulk_weight(js: &[usize]) -> Rational {
    js.iter()
        .enumerate()
        .map(|(idx, &j)| {
            let top = 2 * j as i64 - (idx as i64 + 1);
            df(top) / df(top - 1)
        })
        .product()
}

/// Tabulated closed form for the bulk sum of dimension `d ∈ 2..=7`.
pub fn bulk_closed_form(d: usize, s: usize) -> Result<Rational> {
    if s < d {
        return invalid("need s >= d");
    }
    let si = s as i64;
    let sr = ri(si);
    let poly = |c: &[i64]| -> Rational { c.iter().enumerate().map(|(k, &v)| ri(v) * rpow(&sr, k as i32)).sum() };
    let v = match d {
        2 => ri(si * (si - 1) * (4 * si + 1)) / ri(9),
        3 => df(2 * si - 1) / df(2 * si - 4) * ri((si - 2) * (20 * si * si - 5 * si - 3)) / ri(405),
        4 => ri((si - 1) * (si - 2) * (si - 3)) * poly(&[12, 7, -120, 80]) / ri(2430),
        5 => df(2 * si - 3) / df(2 * si - 6) * ri((si - 3) * (si - 4)) * poly(&[-30, -7, 329, -392, 112]) / ri(51030),
        6 => {
            ri((si - 2) * (si - 3) * (si - 4) * (si - 5)) * poly(&[1566, 159, -17815, 27580, -14000, 2240])
                / ri(2_296_350)
        }
        7 => {
            df(2 * si - 5) / df(2 * si - 8)
                * ri((si - 4) * (si - 5) * (si - 6))
                * poly(&[-756, -15, 8894, -16035, 10820, -3120, 320])
                / ri(6_889_050)
        }
        _ => return invalid(format!("no tabulated bulk sum for d = {d}")),
    };
    Ok(v)
}

/// Tabulated closed form for the border sum `(d, i)`.
pub fn border_closed_form(d: usize, i: usize, s: usize) -> Result<Rational> {
    if s < d {
        return invalid("need s >= d");
    }
    let si = s as i64;
    let sr = ri(si);
    let v = match (d, i) {
        (3, 1) => {
            df(2 * si - 1) / df(2 * si - 4) * rat(1, 3) * (rat(-1, 35) - rat(12, 35) * &sr + rat(3, 7) * &sr * &sr)
        }
        (3, 2) => df(2 * si + 1) / df(2 * si - 4) * rat(1, 5) * (rat(-6, 21) + rat(10, 21) * &sr),
        (4, 1) => ri((si - 1) * (si - 2) * (3 * si - 2) * (24 * si * si - 41 * si - 3)) / ri(630),
        (4, 2) => ri(2 * (si - 1) * (si - 2) * (2 * si - 3) * (2 * si - 1) * (2 * si + 1)) / ri(105),
        (4, 3) => ri((si - 1) * (si - 2) * si * (16 * si * si - 17 * si - 3)) / ri(90),
        _ => return invalid(format!("no tabulated border sum for (d, i) = ({d}, {i})")),
    };
    Ok(v)
}

/// Bulk sum `Σ_{1≤j_1<…<j_d≤s} Π (2j_p-p)!!/(2j_p-p-1)!!`: (enumerated, tabulated).
pub fn bulk_sum(d: usize, s: usize) -> Result<(Rational, Rational)> {
    let rhs = bulk_closed_form(d, s)?;
    let lhs = (1..=s).combinations(d).map(|js| bulk_weight(&js)).sum();
    Ok((lhs, rhs))
}

/// Border sum: same weight over `j_1 < … < j_i = j_{i+1} < … < j_d`.
pub fn border_sum(d: usize, i: usize, s: usize) -> Result<(Rational, Rational)> {
    let rhs = border_closed_form(d, i, s)?;
    let lhs = (1..=s)
        .combinations(d - 1)
        .map(|js| {
            let mut full = js[..i].to_vec();
            full.push(js[i - 1]);
            full.extend_from_slice(&js[i..]);
            bulk_weight(&full)
        })
        .sum();
    Ok((lhs, rhs))
}

// ---------------------------------------------------------- Chu-Vandermonde

/// `Σ_{0≤q_1≤…≤q_{s-1}≤b} Π C(a_p, q_p - q_{p-1})` with `q_0 = 0`, `q_s = b`,
/// against `C(Σ a_p, b)`.
pub fn chu_vandermonde(a_vec: &[usize], b: usize) -> Result<(Rational, Rational)> {
    if a_vec.is_empty() {
        return invalid("need s >= 1");
    }
    let s = a_vec.len();
    let mut lhs = Rational::zero();
    for mids in (0..=b).combinations_with_replacement(s - 1) {
        let mut qs = Vec::with_capacity(s + 1);
        qs.push(0);
        qs.extend(mids);
        qs.push(b);
        lhs += qs.windows(2).zip(a_vec).map(|(w, &a)| rbin_i(a as i64, (w[1] - w[0]) as i64)).product::<Rational>();
    }
    let total: usize = a_vec.iter().sum();
    Ok((lhs, rbin_i(total as i64, b as i64)))
}

// ------------------------------------------------- generalized Vandermonde

/// Column exponents `e_j = j - 1 + Σ_θ δ_θ 1_{j ≥ J_θ+1}`, `j = 1..M`.
pub fn gen_vandermonde_exponents(m: usize, js: &[usize], deltas: &[usize]) -> Vec<usize> {
    (1..=m)
        .map(|j| j - 1 + js.iter().zip(deltas).filter(|(&jt, _)| j > jt).map(|(_, &d)| d).sum::<usize>())
        .collect()
}

/// `det(x_p^{e_j})`.
pub fn power_determinant(x: &[Rational], exps: &[usize]) -> Result<Rational> {
    let rows = x.iter().map(|xp| exps.iter().map(|&e| rpow(xp, e as i32)).collect()).collect();
    ExactMatrix::from_rows(rows)?.determinant()
}

/// `Π_{i<j} (x_j - x_i)`.
pub fn vandermonde_product(x: &[Rational]) -> Rational {
    x.iter().enumerate().flat_map(|(i, xi)| x[i + 1..].iter().map(move |xj| xj - xi)).product()
}

fn elementary_symmetric(x: &[Rational], k: usize) -> Rational {
    x.iter().combinations(k).map(|c| c.into_iter().product::<Rational>()).sum()
}

/// `det(x_p^{e_j}) / Π_{i<j}(x_j - x_i)` for strictly increasing `e`, evaluated
/// without any determinant by iterating the single step: strip `x_1`, replace
/// column `j` by the powers `l_j ∈ [e_{j-1}, e_j - 1]` weighted by
/// `x_1^{e_j - 1 - l_j}`, and recurse on `x_2..x_M`.
pub fn alternant_ratio(x: &[Rational], exps: &[usize]) -> Rational {
    debug_assert!(exps.windows(2).all(|w| w[0] < w[1]));
    if x.len() == 1 {
        return rpow(&x[0], exps[0] as i32);
    }
    if exps[0] > 0 {
        let k = exps[0];
        let shifted: Vec<usize> = exps.iter().map(|e| e - k).collect();
        let lift: Rational = x.iter().map(|xp| rpow(xp, k as i32)).product();
        return lift * alternant_ratio(x, &shifted);
    }
    let mut total = Rational::zero();
    for ls in exps.windows(2).map(|w| w[0]..w[1]).multi_cartesian_product() {
        let weight: usize = exps[1..].iter().zip(&ls).map(|(e, l)| e - 1 - l).sum();
        total += rpow(&x[0], weight as i32) * alternant_ratio(&x[1..], &ls);
    }
    total
}

/// Examples with a single gap (`a = 1`) at position `J`:
/// example 1 (`δ = 1`) against `V(x) e_{M-J}(x)`, example 2 (`δ > 0`) against
/// `V(x)` times the fully iterated single-step sum.
pub fn gen_vandermonde_example(
    example: u8,
    m: usize,
    j: usize,
    delta: usize,
    x: &[Rational],
) -> Result<(Rational, Rational)> {
    if m == 0 || m > 8 || x.len() != m || j == 0 || j > m {
        return invalid("need 1 <= J <= M <= 8 and M nodes");
    }
    let exps = gen_vandermonde_exponents(m, &[j], &[delta]);
    let rhs = match example {
        1 if delta == 1 => vandermonde_product(x) * elementary_symmetric(x, m - j),
        2 if delta > 0 => vandermonde_product(x) * alternant_ratio(x, &exps),
        1 | 2 => return invalid("example 1 needs delta = 1, example 2 needs delta > 0"),
        _ => return invalid("example must be 1 or 2"),
    };
    Ok((power_determinant(x, &exps)?, rhs))
}

/// One factorization step: `Π_{p>1}(x_p - x_1) · Σ_{ξ ∈ ⊗[0,δ_θ]} x_1^{|δ-ξ|} det(…)_{p,j=2..M}`.
/// Needs `1 ≤ J_1 < … < J_a < M` so that every gap has a column to land on.
pub fn gen_vandermonde_step(m: usize, js: &[usize], deltas: &[usize], x: &[Rational]) -> Result<(Rational, Rational)> {
    if !(2..=7).contains(&m) || x.len() != m {
        return invalid("need 2 <= M <= 7 and M nodes");
    }
    if js.is_empty() || js.len() != deltas.len() {
        return invalid("need a >= 1 gap positions with one delta each");
    }
    if js[0] == 0 || js.windows(2).any(|w| w[0] >= w[1]) || *js.last().unwrap() >= m {
        return invalid("gap positions must satisfy 1 <= J_1 < ... < J_a < M");
    }
    let exps = gen_vandermonde_exponents(m, js, deltas);
    let lhs = power_determinant(x, &exps)?;
    let lead: Rational = x[1..].iter().map(|xp| xp - &x[0]).product();
    let mut sum = Rational::zero();
    for xi in deltas.iter().map(|&d| 0..=d).multi_cartesian_product() {
        let sub: Vec<usize> = (2..=m)
            .map(|j| {
                let mut e = (j - 2) as i64;
                for ((&jt, &d), &k) in js.iter().zip(deltas).zip(&xi) {
                    if j > jt {
                        e += d as i64;
                    }
                    if j == jt + 1 {
                        e += k as i64 - d as i64;
                    }
                }
                e as usize
            })
            .collect();
        let weight: usize = deltas.iter().zip(&xi).map(|(d, k)| d - k).sum();
        sum += rpow(&x[0], weight as i32) * power_determinant(&x[1..], &sub)?;
    }
    Ok((lhs, lead * sum))
}

// -------------------------------------------------------------------- suite

/// Names accepted by [`run_suite`].
pub const CHECKS: &[&str] = &[
    "simplex_i",
    "simplex_ii_poly",
    "simplex_ii_special",
    "simplex_ii_resummed",
    "simplex_ii_special_all_m",
    "simplex_ii_resummed_printed",
    "simplex_ii_general",
    "simplex_iii",
    "simplex_iii_printed",
    "simplex_iv",
    "simplex_v",
    "simplex_v_printed",
    "binomial_identity",
    "hypergeometric_identity",
    "bulk_sums",
    "border_sums",
    "chu_vandermonde",
    "gen_vandermonde_example_1",
    "gen_vandermonde_example_2",
    "gen_vandermonde_step",
];

const NODE_POOL: [(i64, i64); 8] = [(2, 1), (-1, 1), (3, 1), (1, 2), (5, 1), (-3, 1), (7, 3), (4, 1)];

fn nodes(m: usize, offset: usize) -> Vec<Rational> {
    (0..m).map(|i| NODE_POOL[(i + offset) % NODE_POOL.len()]).map(|(n, d)| rat(n, d)).collect()
}

fn fmt_x(x: &[Rational]) -> String {
    x.iter().map(fmt_rational).join(",")
}

const N_VECS: &[&[usize]] = &[&[1], &[3], &[1, 1], &[1, 2], &[2, 1], &[0, 1], &[1, 1, 1], &[2, 0, 1], &[1, 2, 3], &[2, 2, 2, 1]];

fn run_check(name: &str) -> Result<IdentityReport> {
    let rep = |ranges: &str, binding: bool, checks: Vec<Instance>| IdentityReport::build(name, ranges, binding, checks);
    let report = match name {
        "simplex_i" => {
            // exact for N = 1; otherwise |lhs/rhs - 1| must shrink along l = 10, 100, 1000
            let mut out = Vec::new();
            for n in 0..5 {
                for l in [1, 7, 30] {
                    let (a, b) = simplex_i(&[n], l)?;
                    out.push(Instance::eq(format!("n=({n}) l={l}"), &a, &b));
                }
            }
            for nv in [&[1usize, 1][..], &[0, 0], &[2, 1], &[1, 0, 2], &[3, 3]] {
                let mut prev: Option<f64> = None;
                for l in [10usize, 100, 1000] {
                    let (a, b) = simplex_i(nv, l)?;
                    let gap = (crate::exactnum::rational_to_f64(&(a / b)) - 1.0).abs();
                    let ok = prev.is_none_or(|p| gap < p);
                    out.push(Instance {
                        params: format!("n=({}) l={l}", nv.iter().join(",")),
                        ok,
                        lhs: format!("|ratio-1|={gap:e}"),
                        rhs: prev.map_or("-".into(), |p| format!("previous={p:e}")),
                    });
                    prev = Some(gap);
                }
            }
            rep("N=1 exact for n<=4; N in {2,3}, l in {10,100,1000} monotone", true, out)
        }
        "simplex_ii_poly" => {
            let out = N_VECS
                .iter()
                .map(|nv| {
                    let (a, b) = (simplex_ii_poly(nv), simplex_ii_brute_poly(nv));
                    Instance {
                        params: format!("n=({})", nv.iter().join(",")),
                        ok: a == b,
                        lhs: format!("{a:?}"),
                        rhs: format!("{b:?}"),
                    }
                })
                .collect();
            rep("ten exponent vectors, s <= 4", true, out)
        }
        "simplex_ii_special" | "simplex_ii_special_all_m" => {
            let all = name.ends_with("all_m");
            let mut out = Vec::new();
            for s in 1..=6 {
                let poly = simplex_ii_poly(&vec![1; s]);
                let lo = if all { 1 } else { 2 * s - 1 };
                for m in lo..=2 * s {
                    out.push(Instance::eq(format!("s={s} m={m}"), &simplex_ii_special(s, m)?, &poly.coeff(m)));
                }
            }
            if all {
                rep("s=1..6, all m (holds for m >= 2s-1 only)", false, out)
            } else {
                rep("s=1..6, m in {2s-1, 2s}", true, out)
            }
        }
        "simplex_ii_resummed" | "simplex_ii_resummed_printed" => {
            let printed = name.ends_with("printed");
            let mut out = Vec::new();
            for s in 1..=8 {
                let poly = simplex_ii_poly(&vec![1; s]);
                for k in 0..=3 {
                    if k == 3 && s < 2 {
                        continue;
                    }
                    let v = simplex_ii_resummed(s, k, printed)?;
                    out.push(Instance::eq(format!("s={s} m=2s-{k}"), &v, &poly.coeff(2 * s - k)));
                }
            }
            if printed {
                rep("s=1..8, m=2s..2s-3 as printed", false, out)
            } else {
                rep("s=1..8, m=2s..2s-3 (corrected lines)", true, out)
            }
        }
        "simplex_ii_general" => {
            let mut out = Vec::new();
            for nv in N_VECS {
                let poly = simplex_ii_poly(nv);
                let top = nv.iter().sum::<usize>() + nv.len();
                for m in 1..=top {
                    out.push(Instance::eq(
                        format!("n=({}) m={m}", nv.iter().join(",")),
                        &simplex_ii_general(nv, m)?,
                        &poly.coeff(m),
                    ));
                }
            }
            rep("ten exponent vectors, all m", false, out)
        }
        "simplex_iii" | "simplex_iii_printed" => {
            let printed = name.ends_with("printed");
            let mut out = Vec::new();
            for nv in &N_VECS[..8] {
                for a in 0..=3 {
                    for b in a..=a + 6 {
                        let (lhs, rhs) = simplex_iii(a, b, nv)?;
                        let rhs = if printed { simplex_iii_printed(a, b, nv)? } else { rhs };
                        out.push(Instance::eq(format!("a={a} b={b} n=({})", nv.iter().join(",")), &lhs, &rhs));
                    }
                }
            }
            rep("a=0..3, b=a..a+6, s <= 3", !printed, out)
        }
        "simplex_iv" => {
            let mut out = Vec::new();
            for q in 1..=4 {
                for j in q + 1..=12 {
                    for qt in 0..j - q {
                        let (a, b) = simplex_iv(q, j, qt)?;
                        out.push(Instance::eq(format!("q={q} j={j} qt={qt}"), &a, &b));
                    }
                }
            }
            rep("q=1..4, j<=12, qt<=j-q-1", true, out)
        }
        "simplex_v" | "simplex_v_printed" => {
            let printed = name.ends_with("printed");
            let mut out = Vec::new();
            for q in 1..=3 {
                for j in q + 1..=12 {
                    for p1 in 0..=3 {
                        for p2 in 0..=3 {
                            for qt in 0..=(j - q) {
                                if j < q + p1 + p2 + qt + 1 {
                                    continue;
                                }
                                let (a, b) = simplex_v(q, j, qt, p1, p2)?;
                                let b = if printed { simplex_v_printed(q, j, qt, p1, p2)? } else { b };
                                out.push(Instance::eq(format!("q={q} j={j} qt={qt} p1={p1} p2={p2}"), &a, &b));
                            }
                        }
                    }
                }
            }
            rep("q=1..3, j<=12, p1,p2<=3", !printed, out)
        }
        "binomial_identity" => {
            let mut out = Vec::new();
            let mut boxes: Vec<(usize, i64, usize, usize)> = Vec::new();
            boxes.extend((2..=20).map(|m| (1, 6, 7, m)));
            boxes.extend((5..=30).map(|m| (4, 3, 7, m)));
            for s in 0..=3 {
                for p in -1..=4 {
                    for x in 0..=4 {
                        boxes.extend((s + 1..=s + 8).map(|m| (s, p, x, m)));
                    }
                }
            }
            for (s, p, x, m) in boxes {
                let (a, b, c) = binomial_identity(s, p, x, m)?;
                let fr = binomial_f_recursive(s, p, x, m - s)?;
                let fp = binomial_f(s, p, x, m - s)?;
                let mut inst = Instance::eq(format!("s={s} p={p} x={x} M={m}"), &a, &b);
                inst.ok = inst.ok && b == c && fr == fp;
                if p == -1 {
                    inst.ok = inst.ok && a == rbin(m - s + x, x + 1);
                }
                out.push(inst);
            }
            rep("(1,6,7,M=2..20), (4,3,7,M=5..30), s<=3, -1<=p<=4, x<=4, M-s<=8", true, out)
        }
        "hypergeometric_identity" => {
            let mut out = Vec::new();
            let mut cases: Vec<(usize, Vec<Rational>, std::ops::RangeInclusive<usize>)> = vec![
                (0, vec![ri(1)], 1..=8),
                (1, vec![ri(0), ri(1)], 2..=6),
                (2, vec![ri(1), ri(0), ri(1)], 3..=8),
                (3, vec![ri(2), ri(-1), ri(0), ri(5)], 1..=8),
            ];
            for a in 0..=4 {
                for deg in 0..=4 {
                    let c = (0..=deg).map(|q| rat((q as i64 * 7 + a as i64 * 3) % 11 - 5, (q as i64 % 3) + 1)).collect();
                    cases.push((a, c, 1..=7));
                }
            }
            for (a, c, ss) in cases {
                for s in ss {
                    let (l, r) = hypergeometric_identity(a, &c, s)?;
                    out.push(Instance::eq(format!("a={a} coeffs=({}) s={s}", fmt_x(&c)), &l, &r));
                }
            }
            rep("a=0..4, degree<=4, s<=8", true, out)
        }
        "bulk_sums" => {
            let mut out = Vec::new();
            for d in 2..=7 {
                let hi = if d == 2 { 12 } else { d + 5 };
                for s in d..=hi {
                    let (a, b) = bulk_sum(d, s)?;
                    out.push(Instance::eq(format!("d={d} s={s}"), &a, &b));
                }
            }
            rep("d=2..7, s=d..d+5 (s<=12 for d=2)", true, out)
        }
        "border_sums" => {
            let mut out = Vec::new();
            for (d, i) in [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3)] {
                for s in d..=d + 6 {
                    let (a, b) = border_sum(d, i, s)?;
                    out.push(Instance::eq(format!("d={d} i={i} s={s}"), &a, &b));
                }
            }
            rep("(3,1),(3,2),(4,1),(4,2),(4,3), s=d..d+6", true, out)
        }
        "chu_vandermonde" => {
            let mut out = Vec::new();
            for (s, amax) in [(1usize, 6usize), (2, 5), (3, 3), (4, 2)] {
                for av in (0..s).map(|_| 0..=amax).multi_cartesian_product() {
                    let total: usize = av.iter().sum();
                    for b in 0..=total + 1 {
                        let (l, r) = chu_vandermonde(&av, b)?;
                        out.push(Instance::eq(format!("a=({}) b={b}", av.iter().join(",")), &l, &r));
                    }
                }
            }
            rep("s<=4, a_p<=6/5/3/2, b<=sum+1", true, out)
        }
        "gen_vandermonde_example_1" | "gen_vandermonde_example_2" => {
            let ex = if name.ends_with('1') { 1 } else { 2 };
            let deltas: Vec<usize> = if ex == 1 { vec![1] } else { vec![1, 2, 3] };
            let mut out = Vec::new();
            for m in 1..=6 {
                for j in 1..=m {
                    for &d in &deltas {
                        for off in 0..3 {
                            let mut x = nodes(m, off);
                            if off == 2 && m > 1 {
                                x[m - 1] = x[0].clone();
                            }
                            let (a, b) = gen_vandermonde_example(ex, m, j, d, &x)?;
                            out.push(Instance::eq(format!("M={m} J={j} delta={d} x=({})", fmt_x(&x)), &a, &b));
                        }
                    }
                }
            }
            rep("M=1..6, J=1..M, three node sets (one with a repeated node)", true, out)
        }
        "gen_vandermonde_step" => {
            let mut out = Vec::new();
            for m in 2..=6 {
                for a in 1..=3.min(m - 1) {
                    for js in (1..m).combinations(a) {
                        for ds in (0..a).map(|_| 0..=2usize).multi_cartesian_product() {
                            let x = nodes(m, m + a);
                            let (l, r) = gen_vandermonde_step(m, &js, &ds, &x)?;
                            out.push(Instance::eq(
                                format!("M={m} J=({}) delta=({})", js.iter().join(","), ds.iter().join(",")),
                                &l,
                                &r,
                            ));
                        }
                    }
                }
            }
            rep("M=2..6, a<=3, J_a<M, delta_theta<=2", true, out)
        }
        other => return invalid(format!("unknown identity '{other}'; known: {}", CHECKS.join(", "))),
    };
    Ok(report)
}

/// Runs every check (or just `only`) in parallel; results come back in [`CHECKS`] order.
pub fn run_suite(only: Option<&str>) -> Result<Vec<IdentityReport>> {
    let names: Vec<&str> = match only {
        Some(n) if CHECKS.contains(&n) => vec![n],
        Some(n) => return invalid(format!("unknown identity '{n}'; known: {}", CHECKS.join(", "))),
        None => CHECKS.to_vec(),
    };
    names.par_iter().map(|n| run_check(n)).collect()
}

/// True when every binding check passed.
pub fn suite_passes(reports: &[IdentityReport]) -> bool {
    reports.iter().filter(|r| r.binding).all(|r| r.pass)
}

/// Per-check pass flags keyed by name, handy for summaries.
pub fn summary(reports: &[IdentityReport]) -> BTreeMap<String, bool> {
    reports.iter().map(|r| (r.name.clone(), r.pass)).collect()
}
