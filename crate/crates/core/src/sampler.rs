//! Seeded Monte Carlo for the sample mean, deterministic variance sweeps and
//! least-squares fits.
//!
//! Every trial owns a ChaCha8 stream: `ChaCha8Rng::seed_from_u64(seed)` with
//! `set_stream(trial_index)`. Trials run in parallel and are merged in index
//! order, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::exactnum::neumaier_sum;
use crate::families::FamilySpec;
use crate::polydist::RealDist;
use crate::{invalid, Error, Result};

/// Cumulative table of normalized probabilities for inverse-CDF draws.
#[derive(Clone, Debug)]
pub struct CdfTable {
    cum: Vec<f64>,
}

impl CdfTable {
    pub fn new(dist: &RealDist) -> Self {
        let w = dist.weights();
        let total = *dist.norm();
        let mut cum = Vec::with_capacity(w.len());
        // compensated prefix sums
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for &x in w {
            let t = s + x;
            if s.abs() >= x.abs() {
                c += (s - t) + x;
            } else {
                c += (x - t) + s;
            }
            s = t;
            cum.push((s + c) / total);
        }
        // the last non-zero outcome must absorb any rounding
        if let Some(last) = w.iter().rposition(|&x| x > 0.0) {
            for v in &mut cum[last..] {
                *v = 1.0;
            }
        }
        CdfTable { cum }
    }

    /// Smallest `j` with `cum[j] > u`, for `u ∈ [0, 1)`.
    pub fn lookup(&self, u: f64) -> usize {
        self.cum.partition_point(|&c| c <= u).min(self.cum.len() - 1)
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        self.lookup(rng.gen::<f64>())
    }

    pub fn m(&self) -> usize {
        self.cum.len() - 1
    }
}

/// The RNG for trial (or unit) `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mean of `n` i.i.d. draws.
pub fn draw_sample_mean<R: Rng>(table: &CdfTable, n: usize, rng: &mut R) -> f64 {
    let mut total: u64 = 0;
    for _ in 0..n {
        total += table.draw(rng) as u64;
    }
    total as f64 / n as f64
}

/// Empirical distribution of the sample mean.
#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub variance_of_sample_mean: f64,
    pub trials: usize,
    pub seed: u64,
    /// Sample standard deviation of the trial means over `√trials`.
    pub standard_error: f64,
    /// Standard error of `variance_of_sample_mean`, `√((m₄ - v²)/trials)`.
    pub variance_standard_error: f64,
}

/// Sample means of `trials` independent experiments, in trial order.
pub fn sample_means(dist: &RealDist, n: usize, trials: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return invalid("sample size N must be at least 1");
    }
    let table = CdfTable::new(dist);
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| draw_sample_mean(&table, n, &mut trial_rng(seed, t)))
        .collect())
}

/// Monte-Carlo estimate of `σ²/N`.
pub fn mc_variance_of_mean(dist: &RealDist, n: usize, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < 100 {
        return invalid("need at least 100 trials");
    }
    let means = sample_means(dist, n, trials, seed)?;
    let t = trials as f64;
    let mean = neumaier_sum(means.iter().copied()) / t;
    let m2 = neumaier_sum(means.iter().map(|x| (x - mean).powi(2))) / t;
    let m4 = neumaier_sum(means.iter().map(|x| (x - mean).powi(4))) / t;
    let var = m2 * t / (t - 1.0);
    Ok(McEstimate {
        mean,
        variance_of_sample_mean: var,
        trials,
        seed,
        standard_error: var.sqrt() / t.sqrt(),
        variance_standard_error: ((m4 - m2 * m2).max(0.0) / t).sqrt(),
    })
}

/// Empirical `P(|X̄ - μ| ≥ threshold)`.
#[derive(Clone, Debug, Serialize)]
pub struct Exceedance {
    pub probability: f64,
    pub hits: usize,
    pub trials: usize,
    pub standard_error: f64,
}

pub fn exceedance_probability(
    dist: &RealDist,
    n: usize,
    trials: usize,
    seed: u64,
    threshold: f64,
) -> Result<Exceedance> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let mu = dist.mean();
    let hits = sample_means(dist, n, trials, seed)?.iter().filter(|x| (*x - mu).abs() >= threshold).count();
    let p = hits as f64 / trials as f64;
    Ok(Exceedance { probability: p, hits, trials, standard_error: (p * (1.0 - p) / trials as f64).sqrt() })
}

/// `σ²/(N t²)`, the Chebyshev bound on `P(|X̄ - μ| ≥ t)` (may exceed 1).
pub fn chebyshev_bound(dist: &RealDist, n: usize, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return invalid("threshold must be positive");
    }
    Ok(dist.sample_mean_variance(n)? / (threshold * threshold))
}

/// Exact `σ²/N` over a grid of `M`, with an optional log-log quadratic fit.
#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub n: usize,
    pub points: Vec<(usize, f64)>,
    /// `(c₀, c₁, c₂)` of `ln v ≈ c₀ + c₁ ln M + c₂ (ln M)²`.
    pub fit: Option<Vec<f64>>,
}

/// Evaluates `family(M)` at every grid point (in parallel) by direct summation.
pub fn sweep<F>(family: F, grid: &[usize], n: usize) -> Result<SweepResult>
where
    F: Fn(usize) -> Result<RealDist> + Sync,
{
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("grid must be non-empty and strictly increasing");
    }
    if n == 0 {
        return invalid("sample size N must be at least 1");
    }
    let values: Vec<f64> =
        grid.par_iter().map(|&m| family(m)?.sample_mean_variance(n)).collect::<Result<_>>()?;
    let points: Vec<(usize, f64)> = grid.iter().copied().zip(values).collect();
    let fit = if points.len() >= 4 && points.iter().all(|p| p.1 > 0.0) {
        Some(loglog_fit(&points, 2)?)
    } else {
        None
    };
    Ok(SweepResult { n, points, fit })
}

/// Ordinary least squares `y ≈ Σ_k c_k x^k`, returned as `c_0..c_degree`.
/// Solved in a centred and scaled basis, then mapped back.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return invalid("x and y lengths differ");
    }
    if xs.len() < degree + 1 {
        return invalid(format!("need at least {} points for degree {degree}", degree + 1));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return invalid("non-finite input");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 && degree > 0 {
        return invalid("all x values coincide");
    }
    let sc = if sd == 0.0 { 1.0 } else { sd };
    let d = degree + 1;
    // normal equations in t = (x - mx)/sc
    let mut a = vec![vec![0.0; d + 1]; d];
    for (x, y) in xs.iter().zip(ys) {
        let t = (x - mx) / sc;
        let pw: Vec<f64> = (0..d).map(|k| t.powi(k as i32)).collect();
        for r in 0..d {
            for c in 0..d {
                a[r][c] += pw[r] * pw[c];
            }
            a[r][d] += pw[r] * y;
        }
    }
    let b = solve_dense(a).ok_or(Error::Singular)?;
    // Σ b_k ((x - mx)/sc)^k expanded in powers of x
    let mut out = vec![0.0; d];
    for (k, bk) in b.iter().enumerate() {
        let f = bk / sc.powi(k as i32);
        for i in 0..=k {
            let binom = (0..i).fold(1.0, |acc, t| acc * (k - t) as f64 / (t + 1) as f64);
            out[i] += f * binom * (-mx).powi((k - i) as i32);
        }
    }
    Ok(out)
}

fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let d = a.len();
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c] == 0.0 {
            return None;
        }
        a.swap(c, p);
        for r in 0..d {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=d {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..d).map(|i| a[i][d] / a[i][i]).collect())
}

/// Natural-log fit `ln v ≈ Σ_k c_k (ln M)^k`.
pub fn loglog_fit(points: &[(usize, f64)], degree: usize) -> Result<Vec<f64>> {
    if points.len() < degree + 2 {
        return invalid(format!("need at least {} points", degree + 2));
    }
    if points.iter().any(|p| !(p.1 > 0.0)) {
        return invalid("log-log fit needs positive values");
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    polyfit(&xs, &ys, degree)
}

/// `lo, lo+step, …, ≤ hi`.
pub fn linear_grid(lo: usize, hi: usize, points: usize) -> Result<Vec<usize>> {
    if points < 2 || hi <= lo {
        return invalid("grid needs hi > lo and at least 2 points");
    }
    let mut g: Vec<usize> = (0..points)
        .map(|i| lo + ((hi - lo) as f64 * i as f64 / (points - 1) as f64).round() as usize)
        .collect();
    g.dedup();
    Ok(g)
}

/// One `(family, M, N)` case of the Monte-Carlo regression suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionCase {
    pub family: FamilySpec,
    pub m: usize,
    pub n: usize,
}

/// Ten fixed cases spanning the families, small and large `M`, `N = 1..100`.
pub fn regression_suite() -> Vec<RegressionCase> {
    use FamilySpec::*;
    let c = |family, m, n| RegressionCase { family, m, n };
    vec![
        c(PowerLaw { s: 1 }, 50, 5),
        c(PowerLaw { s: 2 }, 100, 10),
        c(PowerLaw { s: 6 }, 1000, 100),
        c(SqrtPower { gamma: 1.0 }, 400, 20),
        c(Exponential { alpha: 1.0 }, 30, 10),
        c(Exponential { alpha: 0.5 }, 50, 3),
        c(CounterExample, 3, 2),
        c(GeneralizedCounter { x: 1.0 }, 50, 4),
        c(CustomCoeffs(vec![1.0, 0.5, 0.25]), 2, 1),
        c(PowerLaw { s: 3 }, 10_000, 1),
    ]
}
