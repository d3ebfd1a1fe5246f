//! Exact inverse of `J_{j,n} = j^{n-1}` three ways, plus the short rows.
//!
//! `cargo run --release --example invert_vandermonde -- 6`

use outcomes::exactnum::fmt_rational;
use outcomes::vandermonde::{
    inverse_closed_form, inverse_gauss, inverse_harmonic_form, simple_row, vandermonde_matrix,
};

fn main() {
    let m: usize = std::env::args().nth(1).map(|a| a.parse().expect("M must be an integer")).unwrap_or(6);
    let j = vandermonde_matrix(m).unwrap();
    let inv = inverse_closed_form(m).unwrap();
    assert!(inv.mul(&j).unwrap().is_identity());
    assert_eq!(inv, inverse_gauss(&j).unwrap());
    assert_eq!(inv, inverse_harmonic_form(m).unwrap());

    println!("inverse for M = {m}:");
    for i in 1..=m {
        let row: Vec<String> = inv.row(i).iter().map(fmt_rational).collect();
        println!("  {}", row.join("  "));
    }
    if m >= 4 {
        let last = simple_row(m, m).unwrap();
        println!("row M from its short formula: {}", last.iter().map(fmt_rational).collect::<Vec<_>>().join("  "));
    }
}
