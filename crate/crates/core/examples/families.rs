//! Moments of each built-in family at one `M`.

use outcomes::families::{exp_variance_approx, exp_variance_continuum};
use outcomes::FamilySpec;

fn main() {
    let m = 40;
    let specs = [
        FamilySpec::PowerLaw { s: 2 },
        FamilySpec::SqrtPower { gamma: 1.0 },
        FamilySpec::Exponential { alpha: 1.0 },
        FamilySpec::CounterExample,
        FamilySpec::GeneralizedCounter { x: 1.5 },
    ];
    println!("{:<28} {:>12} {:>14}", "family", "mean", "variance");
    for spec in &specs {
        let d = spec.build(m).unwrap();
        println!("{:<28} {:>12.5} {:>14.6e}", spec.label(), d.mean(), d.variance_exact());
    }
    println!(
        "exponential: large-M expression {:.5}, continuous density {:.5}",
        exp_variance_approx(m, 1.0),
        exp_variance_continuum(m, 1.0)
    );
}
