use multipeak::closed_forms::Dimension;

/// Independent oracle: Petviashvili iteration for −u″ − (N−1)/s u′ + u = u^{p−1}
/// on a vertex-centred finite-volume grid over [0, L] with spacing h.
/// Returns u(0); callers Richardson-extrapolate in h.
pub fn relaxation_peak(dim: Dimension, p: f64, h: f64, len: f64) -> f64 {
    let n = (len / h).round() as usize;
    let d = dim.as_f64();
    let s = |i: f64| i * h;
    // volume of the control cell around node i and flux areas at i ± 1/2
    let vol: Vec<f64> = (0..n)
        .map(|i| {
            let a = if i == 0 { 0.0 } else { s(i as f64 - 0.5) };
            let b = s(i as f64 + 0.5);
            (b.powf(d) - a.powf(d)) / d
        })
        .collect();
    let area: Vec<f64> = (0..n).map(|i| s(i as f64 + 0.5).powf(d - 1.0)).collect();
    // L = −Δ + 1 as a tridiagonal matrix (Dirichlet at node n)
    let diag: Vec<f64> =
        (0..n).map(|i| (area[i] + if i > 0 { area[i - 1] } else { 0.0 }) / (h * vol[i]) + 1.0).collect();
    let upper: Vec<f64> = (0..n).map(|i| -area[i] / (h * vol[i])).collect();
    let lower: Vec<f64> = (0..n).map(|i| if i > 0 { -area[i - 1] / (h * vol[i]) } else { 0.0 }).collect();
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut b = diag[0];
        x[0] = rhs[0] / b;
        for i in 1..n {
            c[i] = upper[i - 1] / b;
            b = diag[i] - lower[i] * c[i];
            x[i] = (rhs[i] - lower[i] * x[i - 1]) / b;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i + 1] * x[i + 1];
        }
        x
    };
    let apply = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut v = diag[i] * u[i];
                if i + 1 < n {
                    v += upper[i] * u[i + 1];
                }
                if i > 0 {
                    v += lower[i] * u[i - 1];
                }
                v
            })
            .collect()
    };
    let gamma = (p - 1.0) / (p - 2.0);
    let mut u: Vec<f64> = (0..n).map(|i| 2.0 * (-(s(i as f64)).powi(2) / 4.0).exp()).collect();
    for _ in 0..400 {
        let f: Vec<f64> = u.iter().map(|v| v.abs().powf(p - 1.0)).collect();
        let lu = apply(&u);
        let num: f64 = (0..n).map(|i| lu[i] * u[i] * vol[i]).sum();
        let den: f64 = (0..n).map(|i| f[i] * u[i] * vol[i]).sum();
        let m = (num / den).powf(gamma);
        let next: Vec<f64> = solve(&f).iter().map(|v| m * v).collect();
        let change = (next[0] - u[0]).abs();
        u = next;
        if change < 1e-15 {
            break;
        }
    }
    u[0]
}
