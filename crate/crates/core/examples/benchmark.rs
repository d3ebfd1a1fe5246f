//! Closed-form inverse against elimination as `M` doubles.
//!
//! `cargo run --release --example benchmark -- 16 32 64`

use outcomes::vandermonde::{bench_inversion, timing_exponent};

fn main() {
    let mut grid: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("M must be an integer")).collect();
    if grid.is_empty() {
        grid = vec![16, 32, 64];
    }
    let points = bench_inversion(&grid).expect("benchmark failed");
    println!("{:>5} {:>12} {:>12}", "M", "closed (s)", "gauss (s)");
    for p in &points {
        println!("{:>5} {:>12.4} {:>12.4}", p.m, p.closed_secs, p.gauss_secs);
    }
    let closed: Vec<(usize, f64)> = points.iter().map(|p| (p.m, p.closed_secs)).collect();
    let gauss: Vec<(usize, f64)> = points.iter().map(|p| (p.m, p.gauss_secs)).collect();
    println!("exponents: closed {:.2}, gauss {:.2}", timing_exponent(&closed), timing_exponent(&gauss));
}
