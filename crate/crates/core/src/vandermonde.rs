//! The matrix `J_{j,n} = j^{n-1}` (`j, n = 1..M`) and its exact inverse.
//!
//! Three independent routes to the inverse are provided:
//!
//! * [`inverse_closed_form`] from the `P` polynomials, `O(M²)` once the
//!   coefficient table is known,
//! * [`inverse_harmonic_form`] from ordered harmonic sums,
//! * [`inverse_gauss`], fraction-free elimination, used as the oracle.
//!
//! `P_i(M)` is the coefficient of `x^i` in `Π_{k=1}^{M} (x + k)`; with it
//!
//! ```text
//! 𝔄_{j,n} = (-1)^{j+n} / ((n-1)! (M-n)!) · Σ_{p=0}^{M-j} P_{j+p}(M) (-n)^p
//! ```
//!
//! where `j` indexes the power (row) and `n` the node (column). All public
//! indices are 1-based.

use std::sync::{OnceLock, RwLock};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::exactnum::{binomial, factorial, ipow, rat, rb, ri, Rational};
use crate::{invalid, Error, Result};

/// Dense matrix of rationals, row-major, 1-based accessors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 1..=n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds from 0-based rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if r == 0 || c == 0 || rows.iter().any(|x| x.len() != c) {
            return invalid("ragged or empty matrix");
        }
        Ok(ExactMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[(i - 1) * self.cols + (j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[(i - 1) * self.cols + (j - 1)] = v;
    }

    /// Row `i` (1-based) as a slice.
    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[(i - 1) * self.cols..i * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> ExactMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 1..=self.rows {
            for j in 1..=self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return invalid(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 1..=self.rows {
            for k in 1..=self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 1..=other.cols {
                    let idx = (i - 1) * out.cols + (j - 1);
                    out.entries[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (1..=self.rows).all(|i| {
                (1..=self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j { v.is_one() } else { v.is_zero() }
                })
            })
    }

    /// Exact rank by rational row reduction.
    pub fn rank(&self) -> usize {
        let mut a = self.to_rows();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !a[r][c].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..self.rows {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] / &a[rank][c];
                for k in c..self.cols {
                    let v = &f * &a[rank][k];
                    a[r][k] -= v;
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    /// Exact determinant (fraction-free elimination after clearing row denominators).
    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return invalid("determinant of a non-square matrix");
        }
        let n = self.rows;
        let mut scale = Rational::one();
        let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 1..=n {
            let (row, l) = clear_row(self.row(i));
            scale /= rb(l);
            a.push(row);
        }
        let (det, _) = bareiss_forward(&mut a, n);
        Ok(rb(det) * scale)
    }
}

/// Multiplies a row by the lcm of its denominators, returning integers and the lcm.
pub(crate) fn clear_row(row: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let l = crate::exactnum::common_denominator(row.iter());
    let ints = row.iter().map(|r| (r * rb(l.clone())).to_integer()).collect();
    (ints, l)
}

/// In-place Bareiss elimination on the first `n` columns of `a` (rows may be
/// wider). Returns the determinant of the leading `n × n` block (zero when
/// singular) and whether elimination completed.
pub(crate) fn bareiss_forward(a: &mut [Vec<BigInt>], n: usize) -> (BigInt, bool) {
    let width = a.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return (BigInt::zero(), false);
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = if sign < 0 { -prev } else { prev };
    (det, true)
}

/// `J_{j,n} = j^{n-1}` for `j, n = 1..M`.
pub fn vandermonde_matrix(m: usize) -> Result<ExactMatrix> {
    if m == 0 {
        return invalid("M must be at least 1");
    }
    let mut out = ExactMatrix::zeros(m, m);
    for j in 1..=m {
        for n in 1..=m {
            out.set(j, n, rb(ipow(j as i64, (n - 1) as u32)));
        }
    }
    Ok(out)
}

/// Exact inverse by fraction-free (Bareiss) elimination on `[A | I]` followed
/// by rational back-substitution.
pub fn inverse_gauss(a: &ExactMatrix) -> Result<ExactMatrix> {
    if a.rows != a.cols {
        return invalid("inverse of a non-square matrix");
    }
    let n = a.rows;
    let mut scales = Vec::with_capacity(n);
    let mut aug: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 1..=n {
        let (mut row, l) = clear_row(a.row(i));
        row.extend((0..n).map(|j| if j == i - 1 { BigInt::one() } else { BigInt::zero() }));
        scales.push(l);
        aug.push(row);
    }
    let (_, ok) = bareiss_forward(&mut aug, n);
    if !ok {
        return Err(Error::Singular);
    }
    // U X = V with U upper triangular in the left block.
    let mut x: Vec<Vec<Rational>> = vec![Vec::new(); n];
    for i in (0..n).rev() {
        let pivot = rb(aug[i][i].clone());
        let mut row: Vec<Rational> = (0..n).map(|c| rb(aug[i][n + c].clone())).collect();
        for k in i + 1..n {
            if aug[i][k].is_zero() {
                continue;
            }
            let f = rb(aug[i][k].clone());
            for c in 0..n {
                row[c] -= &f * &x[k][c];
            }
        }
        for v in row.iter_mut() {
            *v /= &pivot;
        }
        x[i] = row;
    }
    // A = D⁻¹ B with D = diag(scales), so A⁻¹ = B⁻¹ D.
    for row in x.iter_mut() {
        for (c, v) in row.iter_mut().enumerate() {
            *v *= rb(scales[c].clone());
        }
    }
    ExactMatrix::from_rows(x)
}

/// Table of `P_{M-j}(M)` for `j = 0..M` (so `P_M(M) = 1` and `P_0(M) = M!`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PPolyTable {
    m: usize,
    values: Vec<Rational>,
}

impl PPolyTable {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `P_{M-j}(M)`.
    pub fn by_offset(&self, j: usize) -> &Rational {
        &self.values[j]
    }

    /// `P_i(M)`, the coefficient of `x^i` in `Π_{k=1}^{M}(x+k)`.
    pub fn coeff(&self, i: usize) -> &Rational {
        &self.values[self.m - i]
    }

    /// `P̃_{M-j}(M) = P_{M-j}(M) / Π_{p=-1}^{j-1} (M - p)`.
    pub fn normalized(&self, j: usize) -> Rational {
        let mut den = BigInt::one();
        for p in -1..(j as i64) {
            den *= BigInt::from(self.m as i64 - p);
        }
        &self.values[j] / rb(den)
    }

    /// Residual of the defining recursion at offset `j`:
    /// `P_{M-j}(M) - P_{M-1-j}(M-1) + Σ_{p=1}^{j} P_{M-j+p}(M) (-M)^p`, which vanishes.
    pub fn recursion_residual(&self, j: usize) -> Rational {
        let below = if self.m == 1 {
            // R_0(0) = 1
            if j == 0 { Rational::one() } else { Rational::zero() }
        } else {
            let prev = p_polynomials(self.m - 1).expect("M - 1 >= 1");
            prev.values.get(j).cloned().unwrap_or_else(Rational::zero)
        };
        let mut acc = &self.values[j] - below;
        let neg_m = -(self.m as i64);
        for p in 1..=j {
            acc += &self.values[j - p] * rb(ipow(neg_m, p as u32));
        }
        acc
    }
}

fn p_cache() -> &'static RwLock<Vec<Vec<BigInt>>> {
    static CACHE: OnceLock<RwLock<Vec<Vec<BigInt>>>> = OnceLock::new();
    // row l holds P_{l-j}(l) for j = 0..l; row 0 is just P_0(0) = 1
    CACHE.get_or_init(|| RwLock::new(vec![vec![BigInt::one()]]))
}

/// Solves the recursion `R_j(l) = R_j(l-1) - Σ_{p=1}^{j} R_{j-p}(l) (-l)^p`
/// for `R_j(l) = P_{l-j}(l)`, starting from `R_0 = 1` and `R_j(l) = 0` for
/// `j > l`. Rows are cached; building up to `M` costs `O(M³)` integer operations.
pub fn p_polynomials(m: usize) -> Result<PPolyTable> {
    if m == 0 {
        return invalid("M must be at least 1");
    }
    if let Some(row) = p_cache().read().unwrap().get(m) {
        return Ok(PPolyTable { m, values: row.iter().cloned().map(rb).collect() });
    }
    let mut cache = p_cache().write().unwrap();
    while cache.len() <= m {
        let l = cache.len();
        let prev = &cache[l - 1];
        let neg_l = BigInt::from(-(l as i64));
        let powers: Vec<BigInt> = (0..=l).map(|p| num_traits::pow(neg_l.clone(), p)).collect();
        let mut row: Vec<BigInt> = Vec::with_capacity(l + 1);
        row.push(BigInt::one());
        for j in 1..=l {
            let mut v = prev.get(j).cloned().unwrap_or_default();
            for p in 1..=j {
                v -= &row[j - p] * &powers[p];
            }
            row.push(v);
        }
        cache.push(row);
    }
    Ok(PPolyTable { m, values: cache[m].iter().cloned().map(rb).collect() })
}

/// Integer coefficients `P_0(M) .. P_M(M)` (index = power of `x`).
fn p_coeffs_int(m: usize) -> Vec<BigInt> {
    p_polynomials(m).expect("m >= 1");
    let cache = p_cache().read().unwrap();
    let mut v = cache[m].clone();
    v.reverse();
    v
}

/// Closed-form inverse. Rows are evaluated with the Horner-like recursion
/// `Q_j(x) = P_j + x·Q_{j+1}(x)`, `Q_M = 1`, at `x = -n`, which gives every
/// column in `O(M)` and the whole matrix in `O(M²)` big-integer operations.
pub fn inverse_closed_form(m: usize) -> Result<ExactMatrix> {
    if m == 0 {
        return invalid("M must be at least 1");
    }
    let p = p_coeffs_int(m);
    let mut out = ExactMatrix::zeros(m, m);
    for n in 1..=m {
        let den = factorial(n - 1) * factorial(m - n);
        let x = BigInt::from(-(n as i64));
        let mut q = BigInt::one();
        for j in (1..=m).rev() {
            if j < m {
                q = &p[j] + &x * &q;
            }
            let mut v = Rational::new(q.clone(), den.clone());
            if (j + n) % 2 == 1 {
                v = -v;
            }
            out.set(j, n, v);
        }
    }
    Ok(out)
}

/// Elementary symmetric polynomials `e_0..e_k` of a list of rationals.
fn elementary(values: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::one()];
    for v in values {
        e.push(Rational::zero());
        for k in (1..e.len()).rev() {
            let add = &e[k - 1] * v;
            e[k] += add;
        }
    }
    e
}

/// Inverse through ordered harmonic sums:
/// `𝔄_{j,n} = (-1)^{j+n} C(M,n) Σ_p e_p({1/q : q < n}) e_{j-1-p}({1/q : n < q ≤ M})`.
pub fn inverse_harmonic_form(m: usize) -> Result<ExactMatrix> {
    if m == 0 {
        return invalid("M must be at least 1");
    }
    let mut out = ExactMatrix::zeros(m, m);
    for n in 1..=m {
        let lower: Vec<Rational> = (1..n).map(|q| rat(1, q as i64)).collect();
        let upper: Vec<Rational> = (n + 1..=m).map(|q| rat(1, q as i64)).collect();
        let el = elementary(&lower);
        let eu = elementary(&upper);
        let c = rb(binomial(m, n));
        for j in 1..=m {
            let mut acc = Rational::zero();
            for p in 0..j {
                if p < el.len() && j - 1 - p < eu.len() {
                    acc += &el[p] * &eu[j - 1 - p];
                }
            }
            let mut v = &c * acc;
            if (j + n) % 2 == 1 {
                v = -v;
            }
            out.set(j, n, v);
        }
    }
    Ok(out)
}

/// Rows of the inverse with a dedicated short formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimpleRow {
    /// Row `k` for `k ∈ {1, 2, 3}`.
    Top(u8),
    /// Row `M - k` for `k ∈ {0, 1, 2, 3}`.
    Bottom(u8),
}

impl SimpleRow {
    /// Resolves an absolute row index, preferring the top formulas when both apply.
    pub fn resolve(m: usize, row: usize) -> Result<SimpleRow> {
        if (1..=3).contains(&row) && row <= m {
            return Ok(SimpleRow::Top(row as u8));
        }
        if row <= m && m - row <= 3 {
            return Ok(SimpleRow::Bottom((m - row) as u8));
        }
        invalid(format!("row {row} has no short formula for M = {m}"))
    }

    pub fn index(self, m: usize) -> usize {
        match self {
            SimpleRow::Top(k) => k as usize,
            SimpleRow::Bottom(k) => m - k as usize,
        }
    }
}

/// One row of the inverse from its short formula. `row` is the absolute
/// 1-based row index and must be one of `1, 2, 3, M-3, M-2, M-1, M`.
pub fn simple_row(m: usize, row: usize) -> Result<Vec<Rational>> {
    simple_row_by(m, SimpleRow::resolve(m, row)?)
}

/// Same as [`simple_row`] with the formula chosen explicitly.
pub fn simple_row_by(m: usize, which: SimpleRow) -> Result<Vec<Rational>> {
    let ok = match which {
        SimpleRow::Top(k) => (1..=3).contains(&k) && (k as usize) <= m,
        SimpleRow::Bottom(k) => k <= 3 && (k as usize) < m,
    };
    if !ok || m == 0 {
        return invalid(format!("{which:?} does not exist for M = {m}"));
    }
    let mi = m as i64;
    let mut out = Vec::with_capacity(m);
    for n in 1..=m {
        let nr = ri(n as i64);
        let sign = if (n + 1) % 2 == 0 { 1 } else { -1 };
        let first = ri(sign) * rb(binomial(m, n));
        let v = match which {
            SimpleRow::Top(1) => first,
            SimpleRow::Top(2) => {
                let h: Rational = (1..=m).filter(|&q| q != n).map(|q| rat(1, q as i64)).sum();
                -first * h
            }
            SimpleRow::Top(_) => {
                let inv: Vec<Rational> =
                    (1..=m).filter(|&q| q != n).map(|q| rat(1, q as i64)).collect();
                let e = elementary(&inv);
                first * e.get(2).cloned().unwrap_or_default()
            }
            SimpleRow::Bottom(k) => {
                let last = {
                    let s = if (m + n) % 2 == 0 { 1 } else { -1 };
                    ri(s) / rb(factorial(n - 1) * factorial(m - n))
                };
                let mp = |k: i64| ri(mi + k);
                let t1 = mp(0) * mp(1) / ri(2);
                let t2 = mp(-1) * mp(0) * mp(1) * ri(3 * mi + 2) / ri(24);
                match k {
                    0 => last,
                    1 => -&last * (t1 - &nr),
                    2 => &last * (t2 - &nr * &t1 + &nr * &nr),
                    _ => {
                        let t3 = mp(-2) * mp(-1) * mp(0) * mp(0) * mp(1) * mp(1) / ri(48);
                        -&last * (t3 - &nr * &t2 + &nr * &nr * &t1 - &nr * &nr * &nr)
                    }
                }
            }
        };
        out.push(v);
    }
    Ok(out)
}

/// Timing of one inversion method at one size.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BenchPoint {
    pub m: usize,
    pub closed_secs: f64,
    pub gauss_secs: f64,
}

/// Wall-clock comparison of the closed form against elimination. The closed
/// form is timed from a cold `P` cache row so both methods pay for their
/// setup.
pub fn bench_inversion(grid: &[usize]) -> Result<Vec<BenchPoint>> {
    let mut out = Vec::new();
    for &m in grid {
        let t = Instant::now();
        let _ = inverse_closed_form(m)?;
        let closed_secs = t.elapsed().as_secs_f64();
        let j = vandermonde_matrix(m)?;
        let t = Instant::now();
        let _ = inverse_gauss(&j)?;
        let gauss_secs = t.elapsed().as_secs_f64();
        out.push(BenchPoint { m, closed_secs, gauss_secs });
    }
    Ok(out)
}

/// Least-squares slope of `ln t` against `ln M`.
pub fn timing_exponent(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.max(1e-9).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
