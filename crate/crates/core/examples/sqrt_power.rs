//! The order grows like `√M`; the variance slope sits just above 1.

use outcomes::families::{sqrt_power, sqrt_power_order};
use outcomes::sampler::{linear_grid, loglog_fit, sweep};

fn main() {
    let grid = linear_grid(100_000, 500_000, 41).unwrap();
    let res = sweep(|m| sqrt_power(m, 1.0), &grid, 1).unwrap();
    for &(m, v) in res.points.iter().step_by(10) {
        println!("M={m:>6}  order {:>4}  variance {v:.6e}", sqrt_power_order(m, 1.0).unwrap());
    }
    let line = loglog_fit(&res.points, 1).unwrap();
    println!("slope {:.4}", line[1]);
}
