//! The `outcomes` command line: argument parsing, dispatch and file output.
//!
//! Single-file subcommands write `FILE` plus `FILE.manifest.json`; `repro`
//! writes one directory per figure with a `manifest.json` inside. When `--out`
//! is omitted, files go under `$OUTCOMES_OUT_DIR` (default `out/`).
//!
//! Exit codes: 0 success, 1 domain error (or a failing identity check), 2
//! usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::exactnum::{fmt_rational, rational_to_f64};
use crate::families::{self, FamilySpec};
use crate::family_solver::{mode_basis, mode_variance_fit};
use crate::manifest::{num, opt_num, Csv, OutputDir, RunManifest, OUT_DIR_ENV};
use crate::percentiles::{cdf_exact, cdf_paper_approx, convolve_pmf, percentile};
use crate::polydist::classify;
use crate::sampler::{exceedance_probability, linear_grid, loglog_fit, mc_variance_of_mean, sweep};
use crate::vandermonde::{inverse_closed_form, inverse_gauss, inverse_harmonic_form, vandermonde_matrix};
use crate::{identities, Error, Result};

#[derive(Parser, Debug)]
#[command(name = "outcomes", version, about = "Polynomial finite distributions and the variance of the sample mean")]
pub struct Cli {
    /// Worker threads (default: logical cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact inverse of J_{j,n} = j^{n-1} as JSON rows of "num/den".
    Invert {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Divergence case and variance exponent of a family over an M grid.
    Classify {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_parser = parse_grid)]
        m_grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized pmf of one family member as CSV (j, prob).
    Family {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact variance of the sample mean over an M grid (CSV) with optional fit.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_parser = parse_grid)]
        m_grid: Grid,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Also write the quadratic log-log fit as FILE.fit.json.
        #[arg(long)]
        fit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo variance of the sample mean against the exact value.
    Sample {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also estimate P(|mean - mu| >= threshold).
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Percentiles of Z = S_N/N - mu from the exact pmf of S_N.
    Percentile {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![5.0, 50.0, 95.0])]
        p: Vec<f64>,
        /// Points of the z grid in FILE.cdf.csv.
        #[arg(long, default_value_t = 41)]
        z_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mode profiles V_{q,j}·j/q of the family with vanishing high coefficients.
    Modes {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed form versus enumeration for every combinatorial identity.
    Identities {
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Data behind figures 1-4 (all four when --figure is omitted).
    Repro {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: Option<u8>,
        /// Denser M grids (same ranges).
        #[arg(long)]
        paper_scale: bool,
        /// Recorded in the manifests; the figures themselves are deterministic.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Harmonic,
    Gauss,
}

#[derive(Clone, Copy, Debug, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Power,
    Sqrt,
    Exp,
    Counter,
    Gcounter,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, visible_alias = "kind", value_enum)]
    pub family: Kind,
    /// Order of the power law.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Exponent of M in j^{M^x}.
    #[arg(long, default_value_t = 2.0)]
    pub x: f64,
}

impl FamilyArgs {
    pub fn spec(&self) -> FamilySpec {
        match self.family {
            Kind::Power => FamilySpec::PowerLaw { s: self.s },
            Kind::Sqrt => FamilySpec::SqrtPower { gamma: self.gamma },
            Kind::Exp => FamilySpec::Exponential { alpha: self.alpha },
            Kind::Counter => FamilySpec::CounterExample,
            Kind::Gcounter => FamilySpec::GeneralizedCounter { x: self.x },
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Grid(pub Vec<usize>);

/// `a:b:step` or a comma-separated strictly increasing list.
pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a non-negative integer"));
    let g: Vec<usize> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err("expected a:b:step".into());
        }
        let (a, b, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step == 0 || b < a {
            return Err("need step >= 1 and b >= a".into());
        }
        (a..=b).step_by(step).collect()
    } else {
        s.split(',').map(parse).collect::<std::result::Result<_, _>>()?
    };
    if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) {
        return Err("grid must be non-empty and strictly increasing".into());
    }
    Ok(Grid(g))
}

fn default_root() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

/// Output directory and file name for a single-file subcommand.
fn split_out(out: &Option<PathBuf>, default_name: &str) -> Result<(OutputDir, String)> {
    let path = out.clone().unwrap_or_else(|| default_root().join(default_name));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("--out {} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    Ok((OutputDir::create(dir)?, name))
}

fn with_suffix(name: &str, suffix: &str) -> String {
    match name.rsplit_once('.') {
        Some((stem, _)) => format!("{stem}{suffix}"),
        None => format!("{name}{suffix}"),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return 2;
        }
        // ignore "already initialised" when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Invert { m, method, out } => {
            let inv = match method {
                Method::Closed => inverse_closed_form(*m)?,
                Method::Harmonic => inverse_harmonic_form(*m)?,
                Method::Gauss => inverse_gauss(&vandermonde_matrix(*m)?)?,
            };
            let rows: Vec<Vec<String>> =
                inv.to_rows().iter().map(|r| r.iter().map(fmt_rational).collect()).collect();
            let name = format!("invert_m{m}_{}.json", serde_json::to_value(method).unwrap().as_str().unwrap());
            let (mut dir, file) = split_out(out, &name)?;
            dir.write_json(&file, &rows)?;
            finish(dir, &file, "invert", json!({"m": m, "method": method}), None)?;
        }
        Command::Classify { family, m_grid, out } => {
            let spec = family.spec();
            let report = classify(|m| spec.build(m), &m_grid.0)?;
            let (mut dir, file) = split_out(out, &format!("classify_{}.json", spec.label()))?;
            dir.write_json(&file, &report)?;
            finish(dir, &file, "classify", json!({"family": spec, "m_grid": m_grid}), None)?;
        }
        Command::Family { family, m, out } => {
            let spec = family.spec();
            let d = spec.build(*m)?;
            let mut csv = Csv::new(&["j", "prob"]);
            for (j, p) in d.probs().iter().enumerate() {
                csv.row([j.to_string(), num(*p)]);
            }
            let (mut dir, file) = split_out(out, &format!("family_{}_m{m}.csv", spec.label()))?;
            dir.write_csv(&file, &csv)?;
            finish(dir, &file, "family", json!({"family": spec, "m": m}), None)?;
        }
        Command::Sweep { family, m_grid, n, fit, out } => {
            let spec = family.spec();
            let res = sweep(|m| spec.build(m), &m_grid.0, *n)?;
            let mut csv = Csv::new(&["M", "variance_of_mean"]);
            for (m, v) in &res.points {
                csv.row([m.to_string(), num(*v)]);
            }
            let (mut dir, file) = split_out(out, &format!("sweep_{}_n{n}.csv", spec.label()))?;
            dir.write_csv(&file, &csv)?;
            if *fit {
                let linear = loglog_fit(&res.points, 1).ok();
                dir.write_json(&with_suffix(&file, ".fit.json"), &json!({"quadratic": res.fit, "linear": linear}))?;
            }
            finish(dir, &file, "sweep", json!({"family": spec, "m_grid": m_grid, "n": n, "fit": fit}), None)?;
        }
        Command::Sample { family, m, n, trials, seed, threshold, out } => {
            let spec = family.spec();
            let d = spec.build(*m)?;
            let exact = d.sample_mean_variance(*n)?;
            let mc = mc_variance_of_mean(&d, *n, *trials, *seed)?;
            let exceed = match threshold {
                Some(t) => Some(exceedance_probability(&d, *n, *trials, *seed, *t)?),
                None => None,
            };
            let z = (mc.variance_of_sample_mean - exact) / mc.variance_standard_error;
            let body = json!({
                "exact_variance_of_mean": exact,
                "monte_carlo": mc,
                "z_score": z,
                "exceedance": exceed,
            });
            let (mut dir, file) = split_out(out, &format!("sample_{}_m{m}_n{n}.json", spec.label()))?;
            dir.write_json(&file, &body)?;
            let params = json!({"family": spec, "m": m, "n": n, "trials": trials, "threshold": threshold});
            finish(dir, &file, "sample", params, Some(*seed))?;
        }
        Command::Percentile { family, m, n, p, z_points, out } => {
            let spec = family.spec();
            let d = spec.build(*m)?;
            let pmf = convolve_pmf(&d, *n)?;
            let mu = d.mean();
            let mut csv = Csv::new(&["p", "z_p"]);
            for &pp in p {
                csv.row([num(pp), num(percentile(&pmf, mu, pp)?)]);
            }
            let approx_dist = match spec {
                FamilySpec::PowerLaw { s } if n * m <= 400 => Some(families::power_law_exact(*m, s)?),
                _ => None,
            };
            let mut cdf = Csv::new(&["z", "exact", "approx"]);
            let zp = (*z_points).max(2);
            for i in 0..zp {
                let z = -mu + *m as f64 * i as f64 / (zp - 1) as f64;
                let approx = match &approx_dist {
                    Some(e) => Some(cdf_paper_approx(e, *n, z)?),
                    None => None,
                };
                cdf.row([num(z), num(cdf_exact(&pmf, &mu, &z)), opt_num(approx)]);
            }
            let (mut dir, file) = split_out(out, &format!("percentile_{}_m{m}_n{n}.csv", spec.label()))?;
            dir.write_csv(&file, &csv)?;
            dir.write_csv(&with_suffix(&file, ".cdf.csv"), &cdf)?;
            let params = json!({"family": spec, "m": m, "n": n, "p": p, "z_points": zp});
            finish(dir, &file, "percentile", params, None)?;
        }
        Command::Modes { m, s, out } => {
            let basis = mode_basis(*m, *s)?;
            let mut csv = Csv::new(&["q", "j", "value", "exact"]);
            for q in 1..=*s {
                for (t, v) in basis.profile(q).iter().enumerate() {
                    csv.row([q.to_string(), (s + 1 + t).to_string(), num(rational_to_f64(v)), fmt_rational(v)]);
                }
            }
            let (mut dir, file) = split_out(out, &format!("modes_m{m}_s{s}.csv"))?;
            dir.write_csv(&file, &csv)?;
            finish(dir, &file, "modes", json!({"m": m, "s": s}), None)?;
        }
        Command::Identities { only, out } => {
            let reports = identities::run_suite(only.as_deref())?;
            let ok = identities::suite_passes(&reports);
            for r in &reports {
                let tag = if r.pass { "pass" } else if r.binding { "FAIL" } else { "mismatch (diagnostic)" };
                eprintln!("{:32} {:>5} instances  {tag}", r.name, r.instances);
            }
            let (mut dir, file) = split_out(out, "identities.json")?;
            dir.write_json(&file, &json!({"pass": ok, "reports": reports}))?;
            finish(dir, &file, "identities", json!({"only": only}), None)?;
            if !ok {
                eprintln!("error: a binding identity check failed");
                return Ok(1);
            }
        }
        Command::Repro { figure, paper_scale, seed, out } => {
            let root = out.clone().unwrap_or_else(|| default_root().join("repro"));
            let figs: Vec<u8> = figure.map_or_else(|| vec![1, 2, 3, 4], |f| vec![f]);
            for f in figs {
                let mut dir = OutputDir::create(root.join(format!("fig{f}")))?;
                let summary = figure_data(f, *paper_scale, &mut dir)?;
                dir.write_json("summary.json", &summary)?;
                let params = json!({"figure": f, "paper_scale": paper_scale});
                dir.finish(RunManifest::new("repro", params, Some(*seed)))?;
                eprintln!("figure {f}: {}", root.join(format!("fig{f}")).display());
            }
        }
    }
    Ok(0)
}

fn finish(dir: OutputDir, file: &str, sub: &str, params: serde_json::Value, seed: Option<u64>) -> Result<()> {
    let manifest = format!("{file}.manifest.json");
    let path = dir.path().join(file);
    dir.finish_as(RunManifest::new(sub, params, seed), &manifest)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Grids used by `repro`. The default grids already span the full M ranges;
/// `paper_scale` only makes them denser.
pub fn figure_grid(figure: u8, paper_scale: bool) -> Result<Vec<usize>> {
    match (figure, paper_scale) {
        (1, false) => linear_grid(100_000, 200_000, 21),
        (1, true) => linear_grid(100_000, 200_000, 201),
        (2, false) => linear_grid(100_000, 500_000, 41),
        (2, true) => linear_grid(100_000, 500_000, 401),
        (3, _) => Ok((12..=50).collect()),
        (4, false) => Ok((2..=200).collect()),
        (4, true) => Ok((2..=1000).collect()),
        _ => Err(Error::InvalidArgument(format!("no figure {figure}"))),
    }
}

/// Writes the CSV tables for one figure into `dir` and returns its summary.
pub fn figure_data(figure: u8, paper_scale: bool, dir: &mut OutputDir) -> Result<serde_json::Value> {
    let grid = figure_grid(figure, paper_scale)?;
    match figure {
        1 => {
            let mut fits = Vec::new();
            let mut pmf = Csv::new(&["j", "s2", "s3", "s4", "s5", "s6"]);
            let pmfs: Vec<Vec<f64>> = (2..=6).map(|s| families::power_law(100, s).map(|d| d.probs())).collect::<Result<_>>()?;
            for j in 0..=100 {
                pmf.row(std::iter::once(j.to_string()).chain(pmfs.iter().map(|p| num(p[j]))));
            }
            dir.write_csv("pmf_m100.csv", &pmf)?;
            for s in 2..=6usize {
                let res = sweep(|m| families::power_law(m, s), &grid, 1)?;
                let mut csv = Csv::new(&["M", "variance"]);
                for (m, v) in &res.points {
                    csv.row([m.to_string(), num(*v)]);
                }
                dir.write_csv(&format!("variance_s{s}.csv"), &csv)?;
                let c = res.fit.clone().ok_or_else(|| Error::InvalidArgument("fit unavailable".into()))?;
                let sf = s as f64;
                let c0_theory = ((sf + 1.0) / ((sf + 3.0) * (sf + 2.0) * (sf + 2.0))).ln();
                fits.push(json!({"s": s, "c0": c[0], "c1": c[1], "c2": c[2], "c0_theory": c0_theory}));
            }
            Ok(json!({"figure": 1, "fits": fits, "grid_points": grid.len()}))
        }
        2 => {
            let res = sweep(|m| families::sqrt_power(m, 1.0), &grid, 1)?;
            let mut csv = Csv::new(&["M", "order", "variance", "finite_m_theory"]);
            for (m, v) in &res.points {
                let s = families::sqrt_power_order(*m, 1.0)? as f64;
                let mf = *m as f64;
                let theory = mf * mf * (s + 1.0) / ((s + 3.0) * (s + 2.0) * (s + 2.0));
                csv.row([m.to_string(), (s as usize).to_string(), num(*v), num(theory)]);
            }
            dir.write_csv("variance.csv", &csv)?;
            let pmf = families::sqrt_power(1000, 1.0)?.probs();
            let mut p = Csv::new(&["j", "prob"]);
            for (j, v) in pmf.iter().enumerate() {
                p.row([j.to_string(), num(*v)]);
            }
            dir.write_csv("pmf_m1000.csv", &p)?;
            let linear = loglog_fit(&res.points, 1)?;
            Ok(json!({"figure": 2, "slope": linear[1], "linear": linear, "quadratic": res.fit, "grid_points": grid.len()}))
        }
        3 => {
            let s = 10;
            let fit = mode_variance_fit(s, &grid)?;
            let mut header = vec!["M".to_string()];
            header.extend((1..=s).map(|q| format!("q{q}")));
            let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
            for (i, m) in grid.iter().enumerate() {
                csv.row(std::iter::once(m.to_string()).chain(fit.variances.iter().map(|v| num(v[i]))));
            }
            dir.write_csv("tail_variance.csv", &csv)?;
            let basis = mode_basis(50, s)?;
            let mut prof = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
            let profiles: Vec<Vec<f64>> = (1..=s).map(|q| basis.profile(q).iter().map(rational_to_f64).collect()).collect();
            for t in 0..50 - s {
                prof.row(std::iter::once((s + 1 + t).to_string()).chain(profiles.iter().map(|p| num(p[t]))));
            }
            dir.write_csv("profiles_m50.csv", &prof)?;
            Ok(json!({"figure": 3, "s": s, "leading": fit.leading(), "fits": fit.fits}))
        }
        4 => {
            let mut csv = Csv::new(&["alpha", "M", "exact", "approx", "continuum", "rel_diff_exact", "rel_diff_continuum"]);
            let mut worst = Vec::new();
            for alpha in [1.0, 1.5, 2.0] {
                let (mut we, mut wc) = (0.0f64, 0.0f64);
                for &m in &grid {
                    let exact = families::exponential(m, alpha)?.variance_exact();
                    let approx = families::exp_variance_approx(m, alpha);
                    let cont = families::exp_variance_continuum(m, alpha);
                    let (re, rc) = (approx / exact - 1.0, approx / cont - 1.0);
                    if m > 10 {
                        we = we.max(re.abs());
                        wc = wc.max(rc.abs());
                    }
                    csv.row([num(alpha), m.to_string(), num(exact), num(approx), num(cont), num(re), num(rc)]);
                }
                let limit = (-alpha).exp() / (1.0 - (-alpha).exp()).powi(2);
                worst.push(json!({
                    "alpha": alpha,
                    "max_rel_diff_vs_exact_m_gt_10": we,
                    "max_rel_diff_vs_continuum_m_gt_10": wc,
                    "discrete_limit": limit,
                    "continuum_limit": 1.0 / (alpha * alpha),
                }));
            }
            dir.write_csv("exponential.csv", &csv)?;
            Ok(json!({"figure": 4, "alphas": worst}))
        }
        _ => Err(Error::InvalidArgument(format!("no figure {figure}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("10:30:10").unwrap(), Grid(vec![10, 20, 30]));
        assert_eq!(parse_grid("4,8,16").unwrap(), Grid(vec![4, 8, 16]));
        for bad in ["bad", "1:2", "5:1:1", "3,3", "", "1:9:0"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["outcomes", "sweep", "--family", "power", "--s", "2", "--m-grid", "bad"]), 2);
        assert_eq!(run(["outcomes", "frobnicate"]), 2);
        assert_eq!(run(["outcomes", "invert", "--m", "3", "--bogus"]), 2);
    }

    #[test]
    fn domain_errors_exit_1() {
        let dir = std::env::temp_dir().join(format!("outcomes-cli-{}", std::process::id()));
        let out = dir.join("x.json");
        assert_eq!(run(["outcomes", "invert", "--m", "0", "--out", out.to_str().unwrap()]), 1);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
