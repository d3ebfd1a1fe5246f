use num_traits::{One, Zero};
use outcomes::exactnum::{power_sum, power_sum_brute, ri, Rational};
use outcomes::identities::{chu_vandermonde, simplex_iv};
use outcomes::percentiles::{cdf_exact, convolve_pmf};
use outcomes::polydist::coeffs_from_probs;
use outcomes::sampler::{polyfit, trial_rng, CdfTable};
use outcomes::vandermonde::{inverse_closed_form, vandermonde_matrix};
use outcomes::ExactDist;
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=9).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn weights(max_m: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((0i64..=20, 1i64..=6), 2..=max_m + 1)
        .prop_filter("not all zero", |w| w.iter().any(|x| x.0 > 0))
        .prop_map(|w| w.into_iter().map(|(n, d)| Rational::new(n.into(), d.into())).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inverse_is_two_sided(m in 1usize..=12) {
        let j = vandermonde_matrix(m).unwrap();
        let inv = inverse_closed_form(m).unwrap();
        prop_assert!(inv.mul(&j).unwrap().is_identity());
        prop_assert!(j.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn coefficients_round_trip(coeffs in prop::collection::vec(small_rational(), 2..=9)) {
        let m = coeffs.len() - 1;
        let probs: Vec<Rational> = (0..=m)
            .map(|j| {
                let x = ri(j as i64);
                coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * &x + c)
            })
            .collect();
        prop_assert_eq!(coeffs_from_probs(&probs).unwrap(), coeffs);
    }

    #[test]
    fn probabilities_sum_to_one(w in weights(10)) {
        let d = ExactDist::from_weights(w.len() - 1, w).unwrap();
        prop_assert_eq!(d.probs().into_iter().sum::<Rational>(), Rational::one());
        prop_assert!(d.variance_exact() >= Rational::zero());
    }

    #[test]
    fn variance_paths_agree(w in weights(10)) {
        let w: Vec<Rational> = w.into_iter().map(|x| x + ri(1)).collect();
        let d = ExactDist::from_probs(w.len() - 1, w).unwrap();
        prop_assert_eq!(d.variance_beta().unwrap(), d.variance_exact());
    }

    #[test]
    fn convolution_conserves_moments(w in weights(5), n in 1usize..=5) {
        let d = ExactDist::from_weights(w.len() - 1, w).unwrap();
        let pmf = convolve_pmf(&d, n).unwrap();
        let nn = ri(n as i64);
        prop_assert_eq!(pmf.probs.iter().cloned().sum::<Rational>(), Rational::one());
        prop_assert_eq!(pmf.mean(), d.mean() * &nn);
        prop_assert_eq!(pmf.variance(), d.variance_exact() * &nn);
    }

    #[test]
    fn tail_is_monotone(w in weights(6), n in 1usize..=4) {
        let d = ExactDist::from_weights(w.len() - 1, w).unwrap();
        let pmf = convolve_pmf(&d, n).unwrap();
        let mu = d.mean();
        let top = (2 * n * d.m()) as i64;
        let tails: Vec<Rational> = (-2..=top + 2)
            .map(|k| cdf_exact(&pmf, &mu, &(Rational::new(k.into(), (2 * n as i64).into()) - &mu)))
            .collect();
        prop_assert!(tails.windows(2).all(|t| t[1] <= t[0]));
        prop_assert_eq!(tails.first().unwrap(), &Rational::one());
        prop_assert!(tails.last().unwrap().is_zero());
    }

    #[test]
    fn faulhaber_matches_summation(m in 0u64..=60, n in 0usize..=12) {
        prop_assert_eq!(power_sum(m, n), power_sum_brute(m, n));
    }

    #[test]
    fn chu_vandermonde_holds(a in prop::collection::vec(0usize..=5, 1..=4), b in 0usize..=8) {
        let (lhs, rhs) = chu_vandermonde(&a, b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn simplex_iv_holds(q in 1usize..=4, qt in 0usize..=3, extra in 0usize..=4) {
        let (lhs, rhs) = simplex_iv(q, q + qt + 1 + extra, qt).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sampler_stays_in_support(w in prop::collection::vec(0.0f64..5.0, 2..=30), seed in any::<u64>()) {
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let d = outcomes::RealDist::from_weights(w.len() - 1, w.clone()).unwrap();
        let table = CdfTable::new(&d);
        let mut rng = trial_rng(seed, 0);
        for _ in 0..200 {
            let j = table.draw(&mut rng);
            prop_assert!(j < w.len() && w[j] > 0.0);
        }
    }

    #[test]
    fn polyfit_recovers_exact_quadratics(c in prop::array::uniform3(-5.0f64..5.0)) {
        let xs: Vec<f64> = (0..12).map(|i| 10.0 + i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c[0] + c[1] * x + c[2] * x * x).collect();
        let fit = polyfit(&xs, &ys, 2).unwrap();
        for k in 0..3 {
            prop_assert!((fit[k] - c[k]).abs() < 1e-6 * (1.0 + c[k].abs()));
        }
    }
}
