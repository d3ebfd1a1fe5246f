//! Variance of the mean for `ℙ_j = j^s` over large `M`, with log-log fits
//! compared to `ln((s+1)/((s+3)(s+2)²))` for the intercept.

use outcomes::families::power_law;
use outcomes::sampler::{linear_grid, sweep};

fn main() {
    let grid = linear_grid(100_000, 200_000, 21).unwrap();
    for s in 2..=6usize {
        let res = sweep(|m| power_law(m, s), &grid, 1).unwrap();
        let c = res.fit.unwrap();
        let sf = s as f64;
        let theory = ((sf + 1.0) / ((sf + 3.0) * (sf + 2.0).powi(2))).ln();
        println!("s={s}: c0 {:.4} ({theory:.4}), c1 {:.4}, c2 {:.1e}", c[0], c[1], c[2]);
    }
}
