//! Seeded Monte Carlo against the exact variance, and exceedance of a
//! threshold that scales with `M`.

use outcomes::families::power_law;
use outcomes::sampler::{chebyshev_bound, exceedance_probability, mc_variance_of_mean, regression_suite};

fn main() {
    for case in regression_suite() {
        let d = case.family.build(case.m).unwrap();
        let exact = d.sample_mean_variance(case.n).unwrap();
        let est = mc_variance_of_mean(&d, case.n, 20_000, 3).unwrap();
        println!(
            "{:<26} M={:<6} N={:<4} exact {exact:<12.5e} mc {:<12.5e} ± {:.1e}",
            case.family.label(),
            case.m,
            case.n,
            est.variance_of_sample_mean,
            est.variance_standard_error
        );
    }
    for m in [100, 1_000, 10_000] {
        let d = power_law(m, 2).unwrap();
        let t = 0.05 * m as f64;
        let e = exceedance_probability(&d, 100, 50_000, 5, t).unwrap();
        println!(
            "M={m:<6} P(|mean - mu| >= {t}) = {:.4} ± {:.4}, Chebyshev {:.3}",
            e.probability,
            e.standard_error,
            chebyshev_bound(&d, 100, t).unwrap()
        );
    }
}
