//! Percentiles of the centred sample mean from the exact pmf of the sum.

use outcomes::families::{power_law, power_law_exact};
use outcomes::percentiles::{cdf_exact, cdf_paper_approx, convolve_pmf, percentile};

fn main() {
    for m in [20, 40, 80] {
        let d = power_law(m, 2).unwrap();
        let pmf = convolve_pmf(&d, 10).unwrap();
        let mu = d.mean();
        let z: Vec<String> =
            [5.0, 50.0, 95.0].iter().map(|&p| format!("{:+.2}", percentile(&pmf, mu, p).unwrap())).collect();
        println!("M={m:<3} z5 z50 z95 = {}", z.join(" "));
    }
    // the expansion drops the boundary terms, so it is far from the exact tail
    let d = power_law_exact(10, 1).unwrap();
    let pmf = convolve_pmf(&d, 3).unwrap();
    let mu = d.mean();
    for z in [-2.0, 0.0, 2.0] {
        let exact = cdf_exact(&pmf, &mu, &outcomes::Rational::from_float(z).unwrap());
        println!(
            "z={z:+}: exact {:.4}, expansion {:.4e}",
            outcomes::exactnum::rational_to_f64(&exact),
            cdf_paper_approx(&d, 3, z).unwrap()
        );
    }
}
