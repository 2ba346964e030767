use std::f64::consts::PI;

use multipeak::ansatz::*;
use multipeak::closed_forms::{ell, Dimension};
use multipeak::ground_state::{solve_ground_state, GroundStateParams};
use proptest::prelude::*;

fn pattern_strategy() -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(prop_oneof![Just(1), Just(-1)], 2..=8)
}

proptest! {
    #[test]
    fn polygon_sides_and_last_vertex(k in 2usize..=10, r in 0.5f64..40.0) {
        let v = polygon_vertices(k, r, Dimension::Two);
        prop_assert!((norm3(&v[k - 1]) - r).abs() <= 1e-12 * r);
        for j in 0..k {
            prop_assert!((distance(&v[j], &v[(j + 1) % k]) - 3.0 * r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn non_adjacent_vertices_are_further_apart(k in 4usize..=10, r in 0.5f64..40.0) {
        let v = polygon_vertices(k, r, Dimension::Three);
        let mut m = f64::INFINITY;
        for a in 0..k {
            for b in a + 1..k {
                if b != a + 1 && !(a == 0 && b == k - 1) {
                    m = m.min(distance(&v[a], &v[b]));
                }
            }
        }
        prop_assert!(m >= ell(k) * r / 3.0 * (1.0 - 1e-12));
        prop_assert!(ell(k) > 3.0);
    }

    #[test]
    fn other_vertices_stay_beyond_three_r(k in 2usize..=10, r in 0.5f64..40.0) {
        let v = polygon_vertices(k, r, Dimension::Two);
        let t = (k as f64 - 2.0) * PI / (2.0 * k as f64);
        let predicted = r * ((3.0 * t.sin()).powi(2) + (1.0 + 3.0 * t.cos()).powi(2)).sqrt();
        let m = v[..k - 1].iter().map(norm3).fold(f64::INFINITY, f64::min);
        prop_assert!((m - predicted).abs() <= 1e-9 * r, "{} vs {}", m, predicted);
        prop_assert!(m > 3.0 * r);
    }

    #[test]
    fn sign_condition_decides_acceptance(d in pattern_strategy(), p in 2.01f64..3.0) {
        let k = d.len();
        let cyclic: i32 = (0..k).map(|i| d[i] * d[(i + 1) % k]).sum::<i32>() - if k == 2 { d[0] * d[1] } else { 0 };
        match SignPattern::new(&d) {
            Ok(pat) => {
                prop_assert!(cyclic < 0);
                prop_assert!(chi(&pat, p).unwrap() > 0.0);
                prop_assert!(chi_effective(&pat) > 0.0);
            }
            Err(e) => {
                prop_assert!(cyclic >= 0);
                prop_assert!(e.is_config());
            }
        }
    }
}

#[test]
fn admissible_interval_is_ordered_and_grows_with_eta() {
    let pr = solve_ground_state(&GroundStateParams::new(Dimension::Two, 2.7).unwrap()).unwrap();
    let mut last = 0.0;
    for le in [5.0, 6.0, 7.0] {
        let iv = admissible_interval(f64::exp(le), 8.0, &pr).unwrap();
        assert!(iv.r_min < iv.r_max);
        assert!(iv.r_min > last);
        let e = iv.eta;
        assert!((balance(&pr, iv.r_min).unwrap() / (e / e.ln()) - 1.0).abs() < 1e-8);
        assert!((balance(&pr, iv.r_max).unwrap() / (8.0 * e) - 1.0).abs() < 1e-8);
        last = iv.r_min;
    }
}

#[test]
fn pseudo_critical_point_has_the_expected_charge() {
    use multipeak::field_space::FieldSpace;
    let pr = solve_ground_state(&GroundStateParams::new(Dimension::Two, 2.7).unwrap()).unwrap();
    let pat = SignPattern::new(&[1, -1]).unwrap();
    let cfg = PeakConfiguration::new(Dimension::Two, 2.7, 50.0, 3.0, pat).unwrap();
    let grid = fitted_grid(Dimension::Two, 2, 3.0, 0.3, 16.0).unwrap();
    let sp = FieldSpace::for_eta(grid, 50.0, 2.7).unwrap();
    let w = pseudo_critical(&cfg, &pr, &sp).unwrap();
    let v = cfg.vertices();
    let expect = (pr.eval(norm3(&v[0])) - pr.eval(norm3(&v[1]))) / sp.beta;
    assert!((w.q - expect).abs() < 1e-15);
    // a peak too close to the boundary is refused
    let tight = fitted_grid(Dimension::Two, 2, 3.0, 0.3, 8.0).unwrap();
    let sp = FieldSpace::for_eta(tight, 50.0, 2.7).unwrap();
    assert!(pseudo_critical(&cfg, &pr, &sp).is_err());
}
