//! Runs every identity check and prints one line per check.
//!
//! `cargo run --release --example identities -- chu_vandermonde`

use outcomes::identities::{run_suite, suite_passes};

fn main() {
    let only = std::env::args().nth(1);
    let reports = run_suite(only.as_deref()).unwrap();
    for r in &reports {
        let tag = if r.binding { "" } else { " (diagnostic)" };
        println!("{:<30} {:>5} instances, {:>4} failures{tag}  [{}]", r.name, r.instances, r.failures, r.ranges);
        if let Some(c) = &r.first_counterexample {
            println!("    first counterexample {}: {} vs {}", c.params, c.lhs, c.rhs);
        }
    }
    println!("suite {}", if suite_passes(&reports) { "passes" } else { "FAILS" });
}
