//! Divergence case and variance exponent for a few families.

use outcomes::families;
use outcomes::polydist::classify;
use outcomes::ExactDist;

fn main() {
    let grid = [50, 100, 200, 400, 800];
    for s in [1, 2, 4] {
        let r = classify(|m| families::power_law(m, s), &grid).unwrap();
        println!("power law s={s}: {:?}, exponent {:.3}", r.case_label, r.predicted_exponent);
    }
    let r = classify(|m| families::sqrt_power(m, 1.0), &grid).unwrap();
    println!("sqrt power: {:?}, exponent {:.3}", r.case_label, r.predicted_exponent);

    // (j + M)^2: the ratio grows like M, Case 3
    let shifted = |m: usize| {
        let w = (0..=m).map(|j| outcomes::exactnum::ri(((j + m) * (j + m)) as i64)).collect();
        ExactDist::from_probs(m, w).map(|d| d.to_real())
    };
    let r = classify(shifted, &[10, 20, 40, 60]).unwrap();
    println!("(j+M)^2: {:?}, ratios {:?}", r.case_label, r.ratio_sequence);

    let r = classify(families::counterexample, &[10, 20, 30, 40]).unwrap();
    println!("j^(M^2): {:?}, exponent {:.1}", r.case_label, r.predicted_exponent);
}
