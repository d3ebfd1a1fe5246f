//! Mode profiles of the distributions whose coefficients above `s` vanish,
//! and the quadratic growth of their tail variance.

use outcomes::exactnum::rational_to_f64;
use outcomes::family_solver::{mode_basis, mode_variance_fit};

fn main() {
    let b = mode_basis(20, 4).unwrap();
    for q in 1..=4 {
        let prof: Vec<String> = b.profile(q).iter().step_by(4).map(|v| format!("{:8.3}", rational_to_f64(v))).collect();
        println!("mode {q}: {}", prof.join(" "));
    }
    let ms: Vec<usize> = (12..=30).collect();
    let fit = mode_variance_fit(6, &ms).unwrap();
    for (q, f) in fit.fits.iter().enumerate() {
        println!("mode {}: var ~ {:.4} + {:.4} M + {:.6} M^2", q + 1, f[0], f[1], f[2]);
    }
}
