//! Acceptance run: one line per criterion, non-zero exit if any criterion
//! outside `EXPECTED_FAILURES` fails or an expected failure starts passing.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_traits::Zero;
use outcomes::exactnum::{ri, Rational};
use outcomes::families::{self, exp_variance_approx};
use outcomes::family_solver::mode_variance_fit;
use outcomes::percentiles::{cdf_exact, cdf_paper_approx, convolve_pmf, percentile};
use outcomes::sampler::{
    exceedance_probability, linear_grid, loglog_fit, mc_variance_of_mean, regression_suite, sweep,
};
use outcomes::vandermonde::{
    inverse_closed_form, inverse_gauss, inverse_harmonic_form, simple_row, vandermonde_matrix,
};
use outcomes::{identities, ExactDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail on the discrete distributions; see the README.
const EXPECTED_FAILURES: &[u8] = &[5, 6, 10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_rational<R: Rng>(r: &mut R, max_num: i64) -> Rational {
    Rational::new(r.gen_range(1..=max_num).into(), r.gen_range(1..=12i64).into())
}

fn c1_inverse() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=30 {
        let j = vandermonde_matrix(m).unwrap();
        let inv = inverse_closed_form(m).unwrap();
        let ok = inv.mul(&j).unwrap().is_identity() && inv == inverse_gauss(&j).unwrap();
        if !ok {
            bad.push(m);
        }
    }
    outcome(bad.is_empty(), format!("M = 1..30, mismatches at {bad:?}"))
}

fn c2_harmonic_rows() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=15 {
        let j = vandermonde_matrix(m).unwrap();
        if inverse_harmonic_form(m).unwrap() != inverse_gauss(&j).unwrap() {
            bad.push(format!("harmonic M={m}"));
        }
    }
    let mut row3 = 0;
    for m in 4..=30 {
        let oracle = inverse_gauss(&vandermonde_matrix(m).unwrap()).unwrap();
        let mut rows = vec![1, 2];
        rows.extend(m - 3..=m);
        rows.sort_unstable();
        rows.dedup();
        for k in rows {
            if simple_row(m, k).unwrap().as_slice() != oracle.row(k) {
                bad.push(format!("row {k} M={m}"));
            }
        }
        if simple_row(m, 3).map(|r| r.as_slice() == oracle.row(3)).unwrap_or(false) {
            row3 += 1;
        }
    }
    outcome(bad.is_empty(), format!("failures {bad:?}; row 3 matched for {row3}/27 values of M"))
}

fn c3_fig1() -> Outcome {
    let grid = linear_grid(100_000, 200_000, 21).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in 2..=6usize {
        let res = sweep(|m| families::power_law(m, s), &grid, 1).unwrap();
        let c = res.fit.unwrap();
        let sf = s as f64;
        let theory = ((sf + 1.0) / ((sf + 3.0) * (sf + 2.0).powi(2))).ln();
        let ok = (c[0] - theory).abs() <= 0.01 && (c[1] - 2.0).abs() <= 0.01 && c[2].abs() <= 0.001;
        pass &= ok;
        parts.push(format!("s={s}: ({:.5} [{:.5}], {:.5}, {:.1e})", c[0], theory, c[1], c[2]));
    }
    outcome(pass, parts.join("; "))
}

fn c4_fig2() -> Outcome {
    let grid = linear_grid(100_000, 500_000, 41).unwrap();
    let res = sweep(|m| families::sqrt_power(m, 1.0), &grid, 1).unwrap();
    let slope = loglog_fit(&res.points, 1).unwrap()[1];
    outcome((1.00..=1.08).contains(&slope), format!("slope {slope:.5} over 41 points, full grid"))
}

fn c5_exponential() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.0, 1.5, 2.0] {
        let mut worst = (0usize, 0.0f64);
        for m in 11..=200 {
            let exact = families::exponential(m, alpha).unwrap().variance_exact();
            let d = (exp_variance_approx(m, alpha) / exact - 1.0).abs();
            if d > worst.1 {
                worst = (m, d);
            }
        }
        let v200 = families::exponential(200, alpha).unwrap().variance_exact();
        let lim = (v200 * alpha * alpha - 1.0).abs();
        pass &= worst.1 <= 0.01 && lim <= 0.005;
        parts.push(format!(
            "a={alpha}: max rel diff {:.4} at M={}, |var(200)a^2-1| = {lim:.4}",
            worst.1, worst.0
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c6_counterexample() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [50usize, 100, 200] {
        let v = families::counterexample(m).unwrap().variance_exact();
        let mf = m as f64;
        let ratio = v * (3.0 + mf * mf) * (2.0 + mf * mf).powi(2) / (mf * mf * (1.0 + mf * mf));
        pass &= (0.98..=1.02).contains(&ratio);
        parts.push(format!("M={m}: ratio {ratio:.3e}"));
    }
    let pts: Vec<(usize, f64)> = [50usize, 75, 100, 150, 200]
        .iter()
        .map(|&m| (m, families::counterexample(m).unwrap().variance_exact()))
        .collect();
    let exponent = loglog_fit(&pts, 1).unwrap()[1];
    pass &= (-2.2..=-1.8).contains(&exponent);
    parts.push(format!("exponent {exponent:.2}"));
    outcome(pass, parts.join("; "))
}

fn c7_fig3() -> Outcome {
    let ms: Vec<usize> = (12..=50).collect();
    let fit = mode_variance_fit(10, &ms).unwrap();
    let lead = fit.leading();
    let pass = lead.iter().all(|c| (0.0055..=0.0065).contains(c));
    let lo = lead.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lead.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(pass, format!("10 modes, leading coefficients in [{lo:.6}, {hi:.6}]"))
}

fn c8_beta() -> Outcome {
    let mut r = rng(8);
    let mut bad = 0;
    for i in 0..50 {
        let m = r.gen_range(1..=20usize);
        let d = if i % 2 == 0 {
            let probs = (0..=m).map(|_| random_rational(&mut r, 50)).collect();
            ExactDist::from_probs(m, probs).unwrap()
        } else {
            let coeffs = (0..=m).map(|_| random_rational(&mut r, 9)).collect();
            ExactDist::from_coeffs(m, coeffs).unwrap()
        };
        if d.variance_beta().unwrap() != d.variance_exact() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad}/50 mismatches"))
}

fn c9_monte_carlo() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (i, case) in regression_suite().iter().enumerate() {
        let d = case.family.build(case.m).unwrap();
        let exact = d.sample_mean_variance(case.n).unwrap();
        let est = mc_variance_of_mean(&d, case.n, 100_000, 1000 + i as u64).unwrap();
        let z = if est.variance_standard_error > 0.0 {
            (est.variance_of_sample_mean - exact) / est.variance_standard_error
        } else if est.variance_of_sample_mean == exact {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z.abs());
        parts.push(format!("{:+.2}", z));
    }
    outcome(worst <= 4.0, format!("z-scores [{}], max |z| {worst:.2}", parts.join(" ")))
}

fn c10_reverse_lln() -> Outcome {
    let ms = [100usize, 1_000, 10_000];
    let ex: Vec<_> = ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let d = families::power_law(m, 2).unwrap();
            exceedance_probability(&d, 100, 100_000, 77 + i as u64, 0.05 * m as f64).unwrap()
        })
        .collect();
    // one-sided: no step may show a significant decrease at the 5% level
    let zs: Vec<f64> = ex
        .windows(2)
        .map(|w| {
            let se = (w[0].standard_error.powi(2) + w[1].standard_error.powi(2)).sqrt();
            (w[1].probability - w[0].probability) / se
        })
        .collect();
    let pass = zs.iter().all(|&z| z > -1.645);
    let probs = ex.iter().map(|e| format!("{:.5}", e.probability)).join(", ");
    // exact value at the smallest M, for comparison with the estimate
    let d = families::power_law(100, 2).unwrap();
    let pmf = convolve_pmf(&d, 100).unwrap();
    let mu = d.mean();
    let exact: f64 = pmf.probs.iter().enumerate().filter(|(l, _)| (*l as f64 / 100.0 - mu).abs() >= 5.0).map(|p| p.1).sum();
    outcome(
        pass,
        format!(
            "P = [{probs}], step z = [{}], exact P at M=100 is {exact:.5}",
            zs.iter().map(|z| format!("{z:+.2}")).join(", ")
        ),
    )
}

fn c11_identities() -> Outcome {
    let reports = identities::run_suite(None).unwrap();
    let failing: Vec<&str> = reports.iter().filter(|r| r.binding && !r.pass).map(|r| r.name.as_str()).collect();
    let instances: usize = reports.iter().filter(|r| r.binding).map(|r| r.instances).sum();
    let diag = reports.iter().filter(|r| !r.binding).count();
    outcome(
        identities::suite_passes(&reports),
        format!("{instances} binding instances, failing {failing:?}, {diag} diagnostic checks not bound"),
    )
}

fn enumerated_tail(d: &ExactDist, n: usize, t: &Rational) -> Rational {
    let probs = d.probs();
    (0..n)
        .map(|_| 0..=d.m())
        .multi_cartesian_product()
        .filter(|js| ri(js.iter().sum::<usize>() as i64) > *t)
        .map(|js| js.iter().fold(ri(1), |acc, &j| acc * &probs[j]))
        .fold(Rational::zero(), |a, b| a + b)
}

fn c12_percentiles() -> Outcome {
    let mut r = rng(12);
    let mut bad = Vec::new();
    for i in 0..20 {
        let m = r.gen_range(1..=6usize);
        let n = r.gen_range(1..=5usize);
        let d = ExactDist::from_weights(m, (0..=m).map(|_| random_rational(&mut r, 30)).collect()).unwrap();
        let pmf = convolve_pmf(&d, n).unwrap();
        let nn = ri(n as i64);
        let total: Rational = pmf.probs.iter().cloned().sum();
        if total != ri(1) || pmf.mean() != d.mean() * &nn || pmf.variance() != d.variance_exact() * &nn {
            bad.push(format!("conservation #{i}"));
        }
    }
    for m in 1..=4usize {
        for n in 1..=4usize {
            let d = ExactDist::from_weights(m, (0..=m).map(|_| random_rational(&mut r, 30)).collect()).unwrap();
            let pmf = convolve_pmf(&d, n).unwrap();
            let mu = d.mean();
            // every lattice point, every midpoint, and both ends
            for k in -1..=(2 * n * m + 1) as i64 {
                let t = Rational::new(k.into(), 2.into());
                let z = &t / ri(n as i64) - &mu;
                if cdf_exact(&pmf, &mu, &z) != enumerated_tail(&d, n, &t) {
                    bad.push(format!("cdf M={m} N={n} t={t}"));
                }
            }
        }
    }
    let spreads: Vec<f64> = [20usize, 40, 80]
        .iter()
        .map(|&m| {
            let d = families::power_law(m, 2).unwrap();
            let pmf = convolve_pmf(&d, 10).unwrap();
            let mu = d.mean();
            percentile(&pmf, mu, 5.0).unwrap() - percentile(&pmf, mu, 95.0).unwrap()
        })
        .collect();
    if !spreads.windows(2).all(|w| w[1] > w[0]) {
        bad.push("spread not increasing".into());
    }
    let approx = cdf_paper_approx(&families::power_law_exact(20, 2).unwrap(), 10, 0.0).unwrap();
    outcome(
        bad.is_empty(),
        format!(
            "failures {bad:?}; spread z5-z95 = [{}]; approximate tail at z=0 is {approx:.3e} (not bound)",
            spreads.iter().map(|s| format!("{s:.3}")).join(", ")
        ),
    )
}

fn list_files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c13_determinism() -> Outcome {
    let base = std::env::temp_dir().join(format!("outcomes-acceptance-{}", std::process::id()));
    let run = |name: &str, workers: &str| {
        let dir = base.join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_outcomes"))
            .args(["--workers", workers, "repro", "--out"])
            .arg(&dir)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "repro exited with {status}");
        dir
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let files = list_files(&a);
    let mut diff: Vec<String> = Vec::new();
    if files != list_files(&b) {
        diff.push("file lists differ".into());
    }
    for f in &files {
        if std::fs::read(a.join(f)).ok() != std::fs::read(b.join(f)).ok() {
            diff.push(f.display().to_string());
        }
    }
    let manifests = files.iter().filter(|f| f.ends_with("manifest.json")).count();
    let _ = std::fs::remove_dir_all(&base);
    outcome(
        diff.is_empty() && manifests == 4,
        format!("{} files, {manifests} manifests, 1 vs 4 workers, differing {diff:?}", files.len()),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(u8, &str, Check, u64); 13] = [
        (1, "exact inverse", c1_inverse, 60),
        (2, "harmonic form and simple rows", c2_harmonic_rows, 60),
        (3, "power-law variance fits", c3_fig1, 300),
        (4, "square-root power slope", c4_fig2, 600),
        (5, "exponential approximation", c5_exponential, 30),
        (6, "j^(M^2) counterexample", c6_counterexample, 30),
        (7, "mode tail variance", c7_fig3, 120),
        (8, "beta-coefficient variance", c8_beta, 120),
        (9, "Monte-Carlo consistency", c9_monte_carlo, 120),
        (10, "reverse law of large numbers", c10_reverse_lln, 120),
        (11, "identity suite", c11_identities, 180),
        (12, "percentile machinery", c12_percentiles, 60),
        (13, "determinism", c13_determinism, 600),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check, budget) in criteria {
        let t = Instant::now();
        let mut o = check();
        let el = t.elapsed();
        if el > Duration::from_secs(budget) {
            o.pass = false;
            o.detail.push_str(&format!("; over the {budget} s budget"));
        }
        let expected_fail = EXPECTED_FAILURES.contains(&id);
        let verdict = match (o.pass, expected_fail) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (unexpected)",
        };
        if o.pass == expected_fail {
            unexpected.push(id);
        }
        println!("criterion {id:>2} [{name}]: {verdict} in {:.1} s: {}", el.as_secs_f64(), o.detail);
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
