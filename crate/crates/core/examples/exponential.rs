//! The exponential family: exact discrete variance against the large-`M`
//! expression and the continuous density on `[0, M]`.

use outcomes::families::{exp_variance_approx, exp_variance_continuum, exponential};

fn main() {
    for alpha in [1.0, 1.5, 2.0] {
        println!("alpha = {alpha}, discrete limit {:.5}", (-alpha as f64).exp() / (1.0 - (-alpha as f64).exp()).powi(2));
        for m in [5, 11, 20, 50, 200] {
            let exact = exponential(m, alpha).unwrap().variance_exact();
            println!(
                "  M={m:<4} exact {exact:.5}  expression {:.5}  continuum {:.5}",
                exp_variance_approx(m, alpha),
                exp_variance_continuum(m, alpha)
            );
        }
    }
}
