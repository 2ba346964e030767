use std::f64::consts::PI;

use multipeak::closed_forms::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn half_order_bessel_is_elementary(t in 0.1f64..50.0) {
        let k = bessel_k(BesselOrder::Half, t).unwrap();
        let exact = (PI / (2.0 * t)).sqrt() * (-t).exp();
        prop_assert!((k - exact).abs() < 1e-12 * k);
    }

    #[test]
    fn green_is_radial(
        lambda in 0.1f64..5.0,
        x in -20.0f64..20.0,
        y in -20.0f64..20.0,
        z in -20.0f64..20.0,
    ) {
        // permutations and sign flips give points with bitwise-equal |x|
        prop_assume!(x * x + y * y > 1e-4);
        let g2 = GreensEvaluator::new(lambda, Dimension::Two).unwrap();
        let a = green(&g2, &[x, y]).unwrap();
        let b = green(&g2, &[-y, x]).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        let g3 = GreensEvaluator::new(lambda, Dimension::Three).unwrap();
        let a = green(&g3, &[x, y, z]).unwrap();
        let b = green(&g3, &[-y, x, -z]).unwrap();
        prop_assert!((a - b).abs() <= 1e-14 * a.abs());
    }

    #[test]
    fn beta_is_affine_in_its_natural_variable(
        alpha in -5.0f64..5.0,
        l1 in 0.01f64..100.0,
        l2 in 0.01f64..100.0,
        t in 0.0f64..1.0,
    ) {
        // N = 2: affine in log√λ; N = 3: affine in √λ
        let c2 = CouplingParams::new(alpha, Dimension::Two);
        let x = |l: f64| l.sqrt().ln();
        let lm = (x(l1) * (1.0 - t) + x(l2) * t).exp().powi(2);
        let interp = beta(&c2, l1).unwrap() * (1.0 - t) + beta(&c2, l2).unwrap() * t;
        prop_assert!((beta(&c2, lm).unwrap() - interp).abs() < 1e-12 * (1.0 + interp.abs()));
        let c3 = CouplingParams::new(alpha, Dimension::Three);
        let lm = (l1.sqrt() * (1.0 - t) + l2.sqrt() * t).powi(2);
        let interp = beta(&c3, l1).unwrap() * (1.0 - t) + beta(&c3, l2).unwrap() * t;
        prop_assert!((beta(&c3, lm).unwrap() - interp).abs() < 1e-12 * (1.0 + interp.abs()));
    }

    #[test]
    fn threshold_matches_p_star(p in 2.0001f64..3.0) {
        prop_assert_eq!(p_star_threshold(p).unwrap(), p > p_star());
    }

    #[test]
    fn expansion_rate_exceeds_three_exactly_above_p_star(p in 2.0001f64..3.0) {
        let composite = 2.0 * (2.0 * (p - 2.0) + 1.0 / conjugate_exponent(p));
        prop_assert_eq!(composite > 3.0, p_star_threshold(p).unwrap());
    }
}

#[test]
fn p_star_bracket() {
    let p = p_star();
    assert!(p > 2.45 && p < 2.46, "{p}");
    // larger root of 4p² − 9p − 2 = 0, where the threshold is an equality
    let pc = conjugate_exponent(p);
    assert!((2.0 * (2.0 * (p - 2.0) + 1.0 / pc) - 3.0).abs() < 1e-14);
}

#[test]
fn green_tail_matches_bessel_asymptotics() {
    for s in [20.0, 30.0, 45.0] {
        let g = green_radial(Dimension::Two, 1.0, s);
        let lead = Dimension::Two.green_tail_constant() * (-s).exp() / s.sqrt();
        assert!((g / lead - 1.0).abs() < 1.0 / (7.0 * s), "{s}");
    }
}

#[test]
fn green_derivative_matches_difference_quotient() {
    for dim in [Dimension::Two, Dimension::Three] {
        for s in [0.3, 1.0, 4.0, 19.9, 20.1, 33.0] {
            let h = 1e-6 * s;
            let fd = (green_radial(dim, 1.3, s + h) - green_radial(dim, 1.3, s - h)) / (2.0 * h);
            let an = green_radial_derivative(dim, 1.3, s);
            assert!((fd - an).abs() < 1e-7 * an.abs(), "{dim:?} {s}");
        }
    }
}
