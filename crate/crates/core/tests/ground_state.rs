use multipeak::closed_forms::Dimension;
use multipeak::ground_state::*;

mod common;
use common::relaxation_peak;

fn profile(dim: Dimension, p: f64) -> RadialProfile {
    solve_ground_state(&GroundStateParams::new(dim, p).unwrap()).unwrap()
}

#[test]
fn shooting_agrees_with_relaxation() {
    for (dim, p) in [(Dimension::Two, 3.0), (Dimension::Three, 2.6), (Dimension::Two, 2.7)] {
        let pr = profile(dim, p);
        let coarse = relaxation_peak(dim, p, 0.01, 30.0);
        let fine = relaxation_peak(dim, p, 0.005, 30.0);
        let oracle = (4.0 * fine - coarse) / 3.0;
        let rel = (pr.peak() - oracle).abs() / oracle;
        assert!(rel < 1e-6, "{dim:?} p={p}: shooting {} vs relaxation {oracle} ({rel:.2e})", pr.peak());
    }
}

#[test]
fn ode_residual_is_small() {
    for (dim, p) in [(Dimension::Two, 3.0), (Dimension::Three, 2.6)] {
        let pr = profile(dim, p);
        assert!(pr.ode_residual() < 1e-8, "{dim:?}: {:e}", pr.ode_residual());
    }
}

#[test]
fn tail_ratio_converges_monotonically() {
    for (dim, p) in [(Dimension::Two, 3.0), (Dimension::Three, 2.6)] {
        let pr = profile(dim, p);
        let n1 = (dim.as_f64() - 1.0) / 2.0;
        let ratio = |s: f64| s.powf(n1) * s.exp() * pr.eval(s) / pr.tail_amplitude;
        let tail: Vec<f64> = (0..=24).map(|i| ratio(6.0 + i as f64)).collect();
        let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(diffs.iter().all(|d| d.signum() == diffs[0].signum() || d.abs() < 1e-9), "{dim:?}: {tail:?}");
        assert!((ratio(12.0) - 1.0).abs() < 0.02, "{dim:?}: {}", ratio(12.0));
    }
}

#[test]
fn profile_is_stable_under_radial_refinement() {
    let base = GroundStateParams::new(Dimension::Two, 2.7).unwrap();
    let a = solve_ground_state(&base).unwrap();
    let b = solve_ground_state(&GroundStateParams { nodes: 2 * base.nodes - 1, ..base }).unwrap();
    let worst = (0..200).map(|i| 0.1 * i as f64).map(|s| (a.eval(s) - b.eval(s)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6 * a.peak(), "{worst:e}");
}

#[test]
fn cache_round_trip_is_bit_exact() {
    let pr = profile(Dimension::Three, 2.6);
    let dir = std::env::temp_dir().join(format!("mp-gs-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ground_state_3_2.6.csv");
    pr.write_cache(&path).unwrap();
    let back = RadialProfile::read_cache(&path).unwrap();
    assert_eq!(back, pr);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn interaction_obeys_the_entire_space_bound() {
    for (dim, p) in [(Dimension::Two, 2.7), (Dimension::Three, 2.6)] {
        let pr = profile(dim, p);
        let ys: Vec<f64> = (0..10).map(|i| 10.0 + 3.0 * i as f64).collect();
        let logs: Vec<f64> = ys.iter().map(|&y| (interaction_integral(&pr, y).unwrap() * y.exp()).ln()).collect();
        let n = ys.len() as f64;
        let lx: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = logs.iter().sum::<f64>() / n;
        let slope = lx.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        let d = dim.as_f64();
        let bound = d - (d - 1.0) / 2.0 - (p - 1.0) * (d - 1.0) / 2.0;
        assert!(slope <= bound + 0.3, "{dim:?}: power {slope}");
        // the sharp asymptotics I(y) ≈ θ Φ(y) give the power −(N−1)/2
        assert!((slope + (d - 1.0) / 2.0).abs() < 0.3, "{dim:?}: power {slope}");
    }
}

#[test]
fn interaction_tends_to_theta_times_phi() {
    let pr = profile(Dimension::Two, 2.7);
    let theta = theta_phi(&pr).unwrap();
    let r = |y: f64| interaction_integral(&pr, y).unwrap() / (theta * pr.eval(y));
    assert!((r(24.0) - 1.0).abs() < (r(12.0) - 1.0).abs());
    assert!((r(24.0) - 1.0).abs() < 0.01);
}

#[test]
fn convolution_identity_converges() {
    let pr = profile(Dimension::Two, 2.7);
    let e1 = convolution_identity_check(&pr, 8);
    let e2 = convolution_identity_check(&pr, 16);
    assert!(e2 < 1e-4 * pr.peak(), "{e2:e}");
    assert!(e1 / e2 >= 4.0, "{e1:e} → {e2:e}");
}
